//! Taylor-Hood P2/P1 spaces, operator assembly and load vectors.

mod assembly;
mod load;
mod space;

pub use assembly::{assemble, BoundaryCondition, Operators};
pub use load::{load_vector, Load, MatrixFn, TractionFn, VectorFn};
pub use space::{
    p2_gradients, p2_hessians, p2_values, BoundaryNode, ElementGeom, TaylorHood, LOCAL_EDGES,
};
