//! ε-SVR in the dual with four kernels and grid-search tuning.

mod grid;
mod kernel;
mod scaler;
mod svr;

pub use grid::{grid_search, GammaChoice, GridSearchResult, GridSpec, KernelGrids, INNER_FOLDS};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use scaler::StandardScaler;
pub use svr::{
    dual_objective, primal_objective, svr_predict, svr_train, svr_train_detailed, SolverReport, SvrFit,
    SvrHyperparams, SvrModel, SMO_MAX_ITER, SMO_TOLERANCE,
};
