use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// The requested error rate cannot be produced by the strategy even with
    /// full interception.
    #[error("error rate {qber} infeasible: implies eavesdropping fraction {eta} > 1")]
    Infeasible { qber: f64, eta: f64 },

    /// The quantity is mathematically undefined for the given input.
    #[error("undefined: {0}")]
    Undefined(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("strategy {strategy} cannot be applied to {encoding} encoding")]
    StrategyRejected {
        strategy: &'static str,
        encoding: &'static str,
    },

    #[error("no basis disclosure for attacked pulse {0}")]
    MissingDisclosure(u64),

    #[error("pulse {index}: {source}")]
    Pulse {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    pub(crate) fn at_pulse(self, index: u64) -> Self {
        match self {
            e @ Error::Pulse { .. } => e,
            e => Error::Pulse {
                index,
                source: Box::new(e),
            },
        }
    }
}
