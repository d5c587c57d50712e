use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty set where a nonempty compact set is required")]
    EmptySet,
    #[error("operation does not support the {0} representation")]
    UnsupportedRepresentation(&'static str),
    #[error("orbit hit a pole at iteration {step}")]
    PoleHit { step: usize },
    #[error("orbit escaped past the overflow guard at iteration {step}")]
    Escaped { step: usize },
    #[error("no convergence after {steps} steps")]
    NonConvergence { steps: usize },
    #[error("point is not a fixed point (|f(z) - z| = {residual:e})")]
    NotAFixedPoint { residual: f64 },
    #[error("chart construction failed: {0}")]
    ChartConstruction(String),
    #[error("point is not in the basin (no chart entry within {budget} steps)")]
    NotInBasin { budget: usize },
    #[error("point lies outside the verified chart range")]
    OutOfRange,
    #[error("point lies outside the chart disk")]
    NotInChart,
    #[error("point lies outside the attracting petal")]
    NotInPetal,
    #[error("branch correction left the continuity window at step {step}")]
    BranchAmbiguity { step: usize },
    #[error("box-count fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error("least-squares system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("no iterate up to {n_max} moves the target off the keep set")]
    NoDisjointN { n_max: usize },
    #[error("approximation failed; best sup error {best_error:e}")]
    ApproximationFailed { best_error: f64 },
    #[error("target compact has {holes} hole(s)")]
    HoleInTarget { holes: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iterate f^{n} identifies points {i} and {j}")]
    InjectivityViolated { n: usize, i: usize, j: usize },
    #[error("iterated degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("fiber check needs at least two petals, found {petals}")]
    PetalCountTooSmall { petals: usize },
    #[error("schedule step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<LabError>,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Stable snake_case identifier used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::InvalidInput(_) => "invalid_input",
            LabError::EmptySet => "empty_set",
            LabError::UnsupportedRepresentation(_) => "unsupported_representation",
            LabError::PoleHit { .. } => "pole_hit",
            LabError::Escaped { .. } => "escaped",
            LabError::NonConvergence { .. } => "non_convergence",
            LabError::NotAFixedPoint { .. } => "not_a_fixed_point",
            LabError::ChartConstruction(_) => "chart_construction",
            LabError::NotInBasin { .. } => "not_in_basin",
            LabError::OutOfRange => "out_of_range",
            LabError::NotInChart => "not_in_chart",
            LabError::NotInPetal => "not_in_petal",
            LabError::BranchAmbiguity { .. } => "branch_ambiguity",
            LabError::DegenerateFit(_) => "degenerate_fit",
            LabError::IllConditioned { .. } => "ill_conditioned",
            LabError::NoDisjointN { .. } => "no_disjoint_n",
            LabError::ApproximationFailed { .. } => "approximation_failed",
            LabError::HoleInTarget { .. } => "hole_in_target",
            LabError::Precondition(_) => "precondition",
            LabError::InjectivityViolated { .. } => "injectivity_violated",
            LabError::DegreeCapExceeded { .. } => "degree_cap_exceeded",
            LabError::PetalCountTooSmall { .. } => "petal_count_too_small",
            LabError::Step { .. } => "schedule_step_failed",
            LabError::Format(_) => "format",
            LabError::Io(_) => "io",
        }
    }

    /// Innermost error, looking through schedule step wrappers.
    pub fn root(&self) -> &LabError {
        match self {
            LabError::Step { source, .. } => source.root(),
            other => other,
        }
    }
}
