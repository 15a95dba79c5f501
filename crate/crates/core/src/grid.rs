//! Space-time evaluation lattices and fields sampled on them.
//!
//! A [`FieldGrid`] is the coarse lattice `t_j = jT/d`, `v_i = i/d`
//! (`j, i = 0..=d`), optionally refined by an integer factor so that
//! continuum fields can be probed between the coarse nodes. Lattice index
//! arithmetic is exact; the rounding maps act on integer indices.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldGrid {
    horizon: f64,
    d: usize,
    refine: usize,
}

impl FieldGrid {
    pub fn new(horizon: f64, d: usize, refine: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon T = {horizon} must be positive and finite")));
        }
        if d < 2 {
            return Err(domain(format!("resolution d = {d} must be at least 2")));
        }
        if refine == 0 {
            return Err(domain("refinement factor must be at least 1"));
        }
        Ok(Self { horizon, d, refine })
    }

    /// The coarse lattice itself.
    pub fn nodes(horizon: f64, d: usize) -> Result<Self> {
        Self::new(horizon, d, 1)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    /// Intervals of the evaluation lattice per axis, `d * refine`.
    pub fn cells(&self) -> usize {
        self.d * self.refine
    }

    pub fn n_times(&self) -> usize {
        self.cells() + 1
    }

    pub fn n_positions(&self) -> usize {
        self.cells() + 1
    }

    pub fn time(&self, j: usize) -> f64 {
        self.horizon * j as f64 / self.cells() as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        i as f64 / self.cells() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times()).map(|j| self.time(j)).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_positions()).map(|i| self.position(i)).collect()
    }

    pub fn node_time(&self, j: usize) -> f64 {
        self.horizon * j as f64 / self.d as f64
    }

    pub fn node_position(&self, i: usize) -> f64 {
        i as f64 / self.d as f64
    }

    /// Coarse time index of `t_hat`: `t in [t_j, t_{j+1})` maps to `j`,
    /// and the final node `T` maps to itself.
    pub fn t_hat_index(&self, j: usize) -> usize {
        (j / self.refine).min(self.d)
    }

    /// Coarse position index of `v_hat`: the right endpoint of the cell
    /// `(v_{i-1}, v_i]`, so nodes are fixed points.
    pub fn v_hat_index(&self, i: usize) -> usize {
        i.div_ceil(self.refine)
    }

    /// Coarse position index `floor(d v)`, the site read by the step
    /// function `Xi_d(t, v) = Xi(t, floor(dv)/d)`.
    pub fn floor_index(&self, i: usize) -> usize {
        i / self.refine
    }

    /// Lattice index of the coarse node `j` on the evaluation lattice.
    pub fn refined_index(&self, coarse: usize) -> usize {
        coarse * self.refine
    }

    /// `t_hat` for an arbitrary time in `[0, T]`.
    pub fn t_hat(&self, t: f64) -> f64 {
        let x = t * self.d as f64 / self.horizon;
        let j = snap_floor(x).min(self.d);
        self.node_time(j)
    }

    /// `v_hat` for an arbitrary position in `[0, 1]`.
    pub fn v_hat(&self, v: f64) -> f64 {
        let x = v * self.d as f64;
        let r = x.round();
        let i = if (x - r).abs() <= 1e-12 * self.d as f64 { r as usize } else { x.ceil() as usize };
        self.node_position(i.min(self.d))
    }

    pub(crate) fn ensure_same(&self, other: &FieldGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

fn snap_floor(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Discrete stochastic field `Sigma_d`.
    SigmaD,
    /// Truncated continuum stochastic field `S`.
    STruncated,
    /// Discrete deterministic field `Delta_d`.
    DeltaD,
    /// Continuum deterministic field `D`.
    DContinuum,
    /// Chain `Xi_d = Delta_d + Sigma_d`.
    ChainD,
    /// Limit `X = D + S`.
    Limit,
    /// Euler trajectory of a particle system.
    Euler,
}

/// Values of a field on a lattice, rows indexed by time, columns by position.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: FieldGrid,
    pub kind: FieldKind,
    pub values: Array2<f64>,
}

impl Field {
    pub fn new(grid: FieldGrid, kind: FieldKind, values: Array2<f64>) -> Result<Self> {
        let expected = (grid.n_times(), grid.n_positions());
        if values.dim() != expected {
            return Err(Error::GridMismatch(format!(
                "values have shape {:?}, lattice needs {expected:?}",
                values.dim()
            )));
        }
        Ok(Self { grid, kind, values })
    }

    pub fn zeros(grid: FieldGrid, kind: FieldKind) -> Self {
        let values = Array2::zeros((grid.n_times(), grid.n_positions()));
        Self { grid, kind, values }
    }

    /// Pointwise sum, used for `Delta_d + Sigma_d` and `D + S`.
    pub fn plus(&self, other: &Field, kind: FieldKind) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field { grid: self.grid, kind, values: &self.values + &other.values })
    }

    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.values[[j, i]]
    }
}

/// Spreads nodal values (`times x (d+1)` sites) onto the evaluation lattice
/// with the step map `i -> floor(d v)`.
pub(crate) fn step_field(
    grid: FieldGrid,
    kind: FieldKind,
    nodal: &Array2<f64>,
) -> Result<Field> {
    if nodal.dim() != (grid.n_times(), grid.d() + 1) {
        return Err(Error::GridMismatch(format!(
            "nodal values have shape {:?}, expected ({}, {})",
            nodal.dim(),
            grid.n_times(),
            grid.d() + 1
        )));
    }
    let values = Array2::from_shape_fn((grid.n_times(), grid.n_positions()), |(j, i)| {
        nodal[[j, grid.floor_index(i)]]
    });
    Ok(Field { grid, kind, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_lattice() {
        let g = FieldGrid::nodes(2.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.positions(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.times().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rounding_maps_are_idempotent_on_nodes() {
        let g = FieldGrid::new(1.0, 8, 4).unwrap();
        for i in 0..=8 {
            let v = g.node_position(i);
            assert_eq!(g.v_hat(v), v);
            assert_eq!(g.v_hat_index(g.refined_index(i)), i);
            let t = g.node_time(i);
            assert_eq!(g.t_hat(t), t);
            assert_eq!(g.t_hat_index(g.refined_index(i)), i);
        }
    }

    #[test]
    fn rounding_maps_between_nodes() {
        let g = FieldGrid::new(1.0, 4, 4).unwrap();
        // dense index 5 -> v = 5/16, in (1/4, 2/4]
        assert_eq!(g.v_hat_index(5), 2);
        assert_eq!(g.floor_index(5), 1);
        assert_eq!(g.t_hat_index(5), 1);
        assert_eq!(g.v_hat(0.3), 0.5);
        assert_eq!(g.t_hat(0.3), 0.25);
        assert_eq!(g.t_hat(1.0), 1.0);
    }

    #[test]
    fn invalid_grids() {
        assert!(FieldGrid::new(0.0, 4, 1).is_err());
        assert!(FieldGrid::new(1.0, 1, 1).is_err());
        assert!(FieldGrid::new(1.0, 4, 0).is_err());
    }

    #[test]
    fn field_shape_is_checked() {
        let g = FieldGrid::nodes(1.0, 4).unwrap();
        assert!(Field::new(g, FieldKind::SigmaD, Array2::zeros((5, 4))).is_err());
        let a = Field::zeros(g, FieldKind::SigmaD);
        let b = Field::zeros(FieldGrid::nodes(1.0, 8).unwrap(), FieldKind::SigmaD);
        assert!(a.plus(&b, FieldKind::ChainD).is_err());
    }
}
