//! A solved manifold: triangulation, shapes, holonomy and one chart per complete cusp.

use crate::cusps::CuspShape;
use crate::error::{Error, Result};
use crate::hmodel::{MoebiusMap, Tolerance};
use crate::triangulate::{
    build_holonomy, cusp_chart, parse_holonomy, parse_triangulation, solve_shapes, volume, CuspChart, HolonomyRep,
    IdealTriangulation, ShapeVector,
};
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Manifold {
    pub name: String,
    pub tri: Option<IdealTriangulation>,
    pub shapes: Option<ShapeVector>,
    pub holonomy: HolonomyRep,
    /// None for filled cusps.
    pub charts: Vec<Option<CuspChart>>,
    pub tol: Tolerance,
}

impl Manifold {
    pub fn from_triangulation(tri: IdealTriangulation, tol: Tolerance) -> Result<Manifold> {
        let shapes = solve_shapes(&tri)?;
        Manifold::from_shapes(tri, shapes, tol)
    }

    pub fn from_shapes(tri: IdealTriangulation, shapes: ShapeVector, tol: Tolerance) -> Result<Manifold> {
        let holonomy = build_holonomy(&tri, &shapes)?;
        let charts = charts_for(&holonomy, &tol)?;
        Ok(Manifold { name: tri.name.clone(), tri: Some(tri), shapes: Some(shapes), holonomy, charts, tol })
    }

    pub fn from_holonomy(name: &str, holonomy: HolonomyRep, tol: Tolerance) -> Result<Manifold> {
        let charts = charts_for(&holonomy, &tol)?;
        Ok(Manifold { name: name.to_string(), tri: None, shapes: None, holonomy, charts, tol })
    }

    /// Reads a `.tri` triangulation or a `.hol` holonomy file.
    pub fn load(path: &Path, tol: Tolerance) -> Result<Manifold> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let is_hol = path.extension().is_some_and(|e| e == "hol");
        if is_hol {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Manifold::from_holonomy(&name, parse_holonomy(&text)?, tol)
        } else {
            Manifold::from_triangulation(parse_triangulation(&text)?, tol)
        }
    }

    pub fn num_cusps(&self) -> usize {
        self.charts.len()
    }

    pub fn complete_cusps(&self) -> Vec<usize> {
        (0..self.charts.len()).filter(|&k| self.charts[k].is_some()).collect()
    }

    pub fn chart(&self, k: usize) -> Result<&CuspChart> {
        match self.charts.get(k) {
            Some(Some(c)) => Ok(c),
            Some(None) => Err(Error::FilledCusp(k)),
            None => Err(Error::Invalid(format!("no cusp {k}"))),
        }
    }

    /// Cusp shape on the reference cross-section (scale 1).
    pub fn cusp_shape(&self, k: usize) -> Result<CuspShape> {
        let c = self.chart(k)?;
        CuspShape::new(k, c.t_mu, c.t_lambda, 1.0)
    }

    /// Map from chart j coordinates to chart i coordinates.
    pub fn transfer(&self, i: usize, j: usize) -> Result<MoebiusMap> {
        Ok((self.chart(i)?.to_chart * self.chart(j)?.to_chart.inverse()).renormalized())
    }

    /// A group element written in chart i coordinates.
    pub fn in_chart(&self, i: usize, g: &MoebiusMap) -> Result<MoebiusMap> {
        let c = self.chart(i)?.to_chart;
        Ok((c * *g * c.inverse()).renormalized())
    }

    pub fn volume(&self) -> Option<f64> {
        self.shapes.as_ref().map(volume)
    }
}

fn charts_for(rep: &HolonomyRep, tol: &Tolerance) -> Result<Vec<Option<CuspChart>>> {
    (0..rep.cusps.len())
        .map(|k| if rep.cusps[k].complete { cusp_chart(rep, k, tol.geometric).map(Some) } else { Ok(None) })
        .collect()
}
