use num_rational::BigRational;

#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("cannot parse permutation: {0}")]
    ParsePermutation(String),
    #[error("not a permutation of [{size}]: {reason}")]
    InvalidPermutation { size: usize, reason: String },
    #[error("index {index} out of range [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("empty index set")]
    EmptyIndexSet,
    #[error("permutations must all have the same size")]
    MixedSizes,
    #[error("expected {expected} values, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix dimensions mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("mixture weights must sum to 1, got {0}")]
    WeightSum(BigRational),
    #[error("mixture weight {0} is negative")]
    NegativeWeight(BigRational),
    #[error("supplied vectors are linearly dependent")]
    DependentVectors,
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
    #[error("quadruple must consist of four distinct 4-point permutations")]
    BadQuadruple,
    #[error("all four gradients are linearly independent; the kernel certificate does not apply")]
    GradientsIndependent,
    #[error("first three gradients have rank {0} < 3 in every ordering")]
    GradientRankDeficient(usize),
    #[error("(n-1)^2 = {0} is too small; need (n-1)^2 >= 6")]
    GridTooSmall(usize),
    #[error("perturbation vector is zero")]
    ZeroPerturbation,
    #[error("perturbation entry {index} has |x| = {value} > 1/4")]
    PerturbationTooLarge { index: usize, value: BigRational },
    #[error("h_{{{perm}}} does not vanish: exact value {value}")]
    NonZeroResidual { perm: String, value: BigRational },
    #[error("bracketing sign check failed: {0}")]
    EndpointSign(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
