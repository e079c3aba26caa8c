//! Weisfeiler–Leman refinement, rank decompositions and bijective pebble
//! games for graphs of bounded rank width.

pub mod cut;
pub mod decomp;
pub mod error;
pub mod game;
pub mod generators;
pub mod gf2;
pub mod graph;
pub mod io;
pub mod iso;
mod rank;
pub mod split;
pub mod suite;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{Color, Graph, Vertex, VertexSet};
