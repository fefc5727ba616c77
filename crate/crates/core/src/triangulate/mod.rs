//! Ideal triangulations: file parsing, shape solving, volume, cusp translations and holonomy.

mod holonomy;
mod parse;
mod solve;
mod volume;
pub mod words;

pub use holonomy::{
    build_holonomy, cusp_chart, cusp_translations, parse_holonomy, write_holonomy, CuspChart, HolonomyRep,
    PeripheralWords,
};
pub use parse::{parse_complex, parse_triangulation};
pub use solve::{solve_shapes, solve_shapes_from, EquationSystem, ShapeVector, SolveOptions};
pub use volume::{lobachevsky, tetrahedron_volume, volume};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Edge,
    Completeness,
    Filling,
}

impl RowKind {
    /// Imaginary part of the right-hand side, in units of pi.
    pub fn target_pi(self) -> f64 {
        match self {
            RowKind::Completeness => 0.0,
            RowKind::Edge | RowKind::Filling => 2.0,
        }
    }

    pub fn target(self) -> f64 {
        self.target_pi() * PI
    }
}

/// One row: sum a_i Log z_i + sum b_i Log(1 - z_i) + m pi i = target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationRow {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub m: i64,
    pub kind: RowKind,
}

impl EquationRow {
    pub fn combine(p: i64, r1: &EquationRow, q: i64, r2: &EquationRow, kind: RowKind) -> EquationRow {
        let a = r1.a.iter().zip(&r2.a).map(|(x, y)| p * x + q * y).collect();
        let b = r1.b.iter().zip(&r2.b).map(|(x, y)| p * x + q * y).collect();
        EquationRow { a, b, m: p * r1.m + q * r2.m, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    pub meridian: EquationRow,
    pub longitude: EquationRow,
    pub framing_shift: Option<i64>,
    pub filling: Option<(i64, i64)>,
    pub drilled: bool,
    pub peripheral: Option<(String, String)>,
}

impl Cusp {
    pub fn is_complete(&self) -> bool {
        self.filling.is_none()
    }
}

/// Face pairings of one tetrahedron, as needed to develop the triangulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetGluing {
    pub neighbors: [usize; 4],
    /// gluings[f][v]: vertex of neighbors[f] matched with vertex v across face f.
    pub gluings: [[usize; 4]; 4],
    /// Face-pairing generator crossing face f: +k, -k (inverse) or 0 for a face of the spanning tree.
    pub generators: [i32; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combinatorics {
    pub base: usize,
    pub tets: Vec<TetGluing>,
}

impl Combinatorics {
    pub fn num_generators(&self) -> usize {
        self.tets.iter().flat_map(|t| t.generators).map(|g| g.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealTriangulation {
    pub name: String,
    pub n: usize,
    pub edges: Vec<EquationRow>,
    pub cusps: Vec<Cusp>,
    pub combinatorics: Option<Combinatorics>,
}

impl IdealTriangulation {
    pub fn num_cusps(&self) -> usize {
        self.cusps.len()
    }

    /// Copy with cusp `k` Dehn filled along p mu + q lambda.
    pub fn with_filling(&self, k: usize, p: i64, q: i64) -> Result<IdealTriangulation> {
        if k >= self.cusps.len() {
            return Err(Error::Invalid(format!("no cusp {k}")));
        }
        if p == 0 && q == 0 {
            return Err(Error::ZeroSlope);
        }
        let mut t = self.clone();
        t.cusps[k].filling = Some((p, q));
        Ok(t)
    }

    /// Copy with every filling removed.
    pub fn unfilled(&self) -> IdealTriangulation {
        let mut t = self.clone();
        for c in &mut t.cusps {
            c.filling = None;
        }
        t
    }

    pub fn drilled_cusp(&self) -> Option<usize> {
        self.cusps.iter().position(|c| c.drilled)
    }
}
