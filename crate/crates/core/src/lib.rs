// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod contracts;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod normal;
pub mod objectives;
pub mod quadrature;
pub mod risk_measures;
pub mod scenario;
pub mod search;
pub mod worst_case;

pub use contracts::{AdmissibleDomain, Indemnity};
pub use distributions::{DiscreteLaw, Distribution, TailShape};
pub use error::{Error, Result};
pub use objectives::{minimize, ObjectiveId, OptimizeResult};
pub use risk_measures::{RiskLevels, Side};
pub use scenario::{Dependence, Mode, Scenario};
pub use search::SearchConfig;
