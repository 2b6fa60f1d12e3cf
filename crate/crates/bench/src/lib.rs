//! Shared fixtures for the benchmarks.

use loopon_core::{Domain, LatticeKind, Vertex};

pub fn z2_box(sides: &[usize]) -> Domain {
    Domain::lattice_box(LatticeKind::HyperCubic(2), &Vertex::origin(2), sides).expect("valid box")
}

pub fn hex_box(sides: &[usize]) -> Domain {
    Domain::lattice_box(LatticeKind::Hexagonal, &Vertex::origin(2), sides).expect("valid box")
}
