//! Symbolic dynamics, linear cocycles over subshifts of finite type, and
//! numerical experiments on their Lyapunov spectra, Oseledets flags and
//! invariant measures on Grassmannian bundles.
//!
//! Exact computations run over [`Rational`]; sampling and asymptotics run
//! over `f64`.

pub mod cocycle;
pub mod linalg;
pub mod lyapunov;
pub mod markov;
pub mod multilinear;
pub mod scalar;
pub mod symbolic;
pub mod ustate;

use thiserror::Error;

pub use cocycle::{
    adjoint_cocycle, AdjointCocycle, BunchingCertificate, Cocycle, CocycleError, Holonomy, LocallyConstantCocycle,
    ReducedCocycle,
};
pub use linalg::Mat;
pub use lyapunov::{estimate_spectrum, flag_estimate, LyapunovError, SpectrumEstimate};
pub use markov::{MarkovError, MarkovMeasure, Side};
pub use multilinear::{
    verify_counterexample, GrassmannPoint, KVector, LinearArrangement, LinearSection, MultilinearError,
    QuasiProjectiveMap,
};
pub use scalar::{Rational, Scalar};
pub use symbolic::{Sidedness, SubshiftSpec, Symbol, SymbolicError, SymbolicPoint};
pub use ustate::{ConcentrationReport, EmpiricalGrassmannMeasure, UstateError};

pub type KVectorF64 = KVector<f64>;
pub type KVectorQ = KVector<Rational>;
pub type LinearSectionF64 = LinearSection<f64>;
pub type LinearSectionQ = LinearSection<Rational>;
pub type MarkovMeasureF64 = MarkovMeasure<f64>;
pub type MarkovMeasureQ = MarkovMeasure<Rational>;
pub type LocallyConstantCocycleF64 = LocallyConstantCocycle<f64>;
pub type LocallyConstantCocycleQ = LocallyConstantCocycle<Rational>;
pub type MatF64 = Mat<f64>;
pub type MatQ = Mat<Rational>;

/// Broad failure classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data.
    Config,
    /// Valid input on which an operation's hypotheses fail.
    Precondition,
    /// Loss of accuracy or convergence.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Ustate(#[from] UstateError),
}

fn symbolic_kind(e: &SymbolicError) -> ErrorKind {
    use SymbolicError::*;
    match e {
        NotSquare | AlphabetTooLarge(_) | NotBinary(..) | EmptyRow(_) | EmptyColumn(_) | NotIrreducible | BadSymbol(_)
        | Inadmissible(..) | NoTail => ErrorKind::Config,
        _ => ErrorKind::Precondition,
    }
}

fn markov_kind(e: &MarkovError) -> ErrorKind {
    use MarkovError::*;
    match e {
        Shape(_) | NotStochastic(_) | Negative(..) | Support(..) | Inadmissible(_) | Parse(_) | Point(_) => {
            ErrorKind::Config
        }
        Stationary => ErrorKind::Numerical,
        EmptySet => ErrorKind::Precondition,
        Symbolic(s) => symbolic_kind(s),
    }
}

fn cocycle_kind(e: &CocycleError) -> ErrorKind {
    use CocycleError::*;
    match e {
        MissingWord(_) | BadWord(..) | Shape(..) | Parse(_) => ErrorKind::Config,
        IllConditioned(..) | Truncation => ErrorKind::Numerical,
        NotBunched(_) | NotOnLeaf(_) | OutOfDomain(_) | BadTime(_) => ErrorKind::Precondition,
        Symbolic(s) => symbolic_kind(s),
    }
}

fn multilinear_kind(e: &MultilinearError) -> ErrorKind {
    use MultilinearError::*;
    match e {
        Shape(_) | Parse(_) | DegreeOverflow(..) => ErrorKind::Config,
        NotCauchy(_) => ErrorKind::Numerical,
        _ => ErrorKind::Precondition,
    }
}

fn lyapunov_kind(e: &LyapunovError) -> ErrorKind {
    use LyapunovError::*;
    match e {
        Cocycle(c) => cocycle_kind(c),
        Multilinear(m) => multilinear_kind(m),
        BadDegree(..) => ErrorKind::Config,
        _ => ErrorKind::Precondition,
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Symbolic(e) => symbolic_kind(e),
            Error::Markov(e) => markov_kind(e),
            Error::Cocycle(e) => cocycle_kind(e),
            Error::Multilinear(e) => multilinear_kind(e),
            Error::Lyapunov(e) => lyapunov_kind(e),
            Error::Ustate(e) => match e {
                UstateError::Singular(_) => ErrorKind::Numerical,
                UstateError::AmbientMismatch | UstateError::BadWeight | UstateError::Empty => ErrorKind::Config,
                UstateError::Lyapunov(l) => lyapunov_kind(l),
                UstateError::Cocycle(c) => cocycle_kind(c),
                UstateError::Multilinear(m) => multilinear_kind(m),
                UstateError::Markov(m) => markov_kind(m),
                UstateError::Symbolic(s) => symbolic_kind(s),
                _ => ErrorKind::Precondition,
            },
        }
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T, E = Error> = std::result::Result<T, E>;
