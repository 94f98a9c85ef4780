use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// The requested value sits on (or past) a pole of a Gamma factor.
    #[error("pole in {func}: {msg}")]
    Pole { func: &'static str, msg: String },

    /// Radii passed in the wrong order.
    #[error("argument order error: expected f <= g, got f = {f}, g = {g}")]
    ArgumentOrder { f: f64, g: f64 },

    /// Quadrature could not reach the requested tolerance within its budget.
    #[error("accuracy error: requested {requested:e}, achieved {achieved:e}")]
    Accuracy { requested: f64, achieved: f64 },

    /// Sampled field carries too much mass in the grid margin band.
    #[error("support overflow: margin mass fraction {fraction:e} exceeds {limit:e}")]
    SupportOverflow { fraction: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("schedule synthesis did not converge (best residual {residual:e})")]
    Synthesis { residual: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("endpoint map is not strictly increasing between seeds {left} and {right}")]
    Diffeomorphism { left: f64, right: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { func, msg: msg.into() }
    }

    pub(crate) fn pole(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Pole { func, msg: msg.into() }
    }
}
