//! Completeness lab for degenerate Sturm-Liouville operators on the circle.
//!
//! The crate answers one question from two independent directions: for the
//! operator `P = d/dx a(x) d/dx - i b(x) d/dx - (i/2) b'(x)` with real
//! trigonometric-polynomial coefficients on the unit circle, is the
//! Hamiltonian flow of the symbol `p = -a xi^2 + b xi` complete, and is `P`
//! essentially self-adjoint on smooth functions?
//!
//! * [`classify`] gives the symbolic verdict from the zero structure of `a`
//!   and the values of `b` there.
//! * [`flow`] integrates the Hamiltonian flow and hunts for finite-time
//!   blowup, the classical side of the story.
//! * [`frobenius`] and [`deficiency`] build local solution bases near each
//!   zero and estimate deficiency indices, the quantum side.
//! * [`lorentz`] carries the same analysis to Lorentzian model surfaces whose
//!   light-ray and wave-operator completeness reduce to the 1-D problem.
//!
//! Every symbolic verdict produced here is checkable by at least one numeric
//! pipeline in the same crate, and the two sides are required to agree.

pub mod classify;
pub mod coeff;
pub mod deficiency;
pub mod flow;
pub mod frobenius;
pub mod gallery;
pub mod lorentz;
pub mod report;
mod rk;
mod series;

pub use classify::{
    CaseTag, ClassifyError, CompletenessReport, Degree1Rule, Interval, SturmLiouvilleOperator,
    ZeroVerdict,
};
pub use coeff::{BOrder, CoeffError, TrigPoly, ZeroRecord};
pub use deficiency::{
    DeficiencyEstimate, DeficiencyError, EndpointClassification, TailReport, WeylVerdict,
};
pub use flow::{FlowControls, FlowError, FlowStatus, NullBranch, PhasePoint, Trajectory};
pub use frobenius::{
    FrobeniusError, FrobeniusSeries, IndicialEquation, IrregularSolution, LocalODE,
    OscillatoryPair, Side,
};
pub use lorentz::{
    ConformalFactor, CotangentState, GeodesicControls, GeodesicTrajectory, LorentzError,
    LorentzModel,
};
pub use report::{JobReport, ZeroRow};
