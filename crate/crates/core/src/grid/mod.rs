//! Grid geometry, the nested level hierarchy and the coarse-first layout.

mod hierarchy;
mod layout;
mod ndindex;
mod norm;
mod tensor;

pub use hierarchy::{GridHierarchy, NodePartition};
pub use layout::{hierarchical_order, reorder, Direction, LayoutMap};
pub use ndindex::{for_each_index, for_each_tensor, strides};
pub use norm::{mass_weighted_dot, weighted_l2_norm};
pub use tensor::{uniform_coords, TensorGrid, MAX_DIMS, MIN_NODES};
