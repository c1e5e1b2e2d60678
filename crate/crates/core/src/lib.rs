pub mod algebroid;
pub mod control;
pub mod error;
pub mod numerics;
pub mod paths;
pub mod pmp;
pub mod scenarios;

pub use algebroid::{ChartAlgebroid, ExtendedAlgebroid, Section, StructureTensor};
pub use control::{ControlSignal, ControlSpace, ControlSystem, CostatePath, Interval, Trajectory};
pub use error::{Error, Result};
pub use numerics::{integrate, OdeRhs, TimeGrid};
pub use paths::{EPath, HomotopyField, PathFamily};
pub use pmp::{
    cone_support_check, develop_to_group, hamiltonian, integrate_pmp_flow, maximize_hamiltonian, needle_vector,
    verify_extremal, ExtremalAudit, Representation, TimeMode, VariationSymbol,
};
