//! Cusped and coned spaces over Cayley balls of relatively hyperbolic
//! groups, with tools for measuring hyperbolicity, quasi-isometry constants
//! and the tree of cut points and cut pairs of a graph.

pub mod boundary_tree;
pub mod cusp_spaces;
pub mod error;
pub mod group_models;
pub mod hyperbolicity;
pub mod metric_graph;
pub mod qi_lab;
pub mod sphere_approx;

pub use error::{Error, Result};
