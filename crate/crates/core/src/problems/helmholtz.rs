//! Scalar Helmholtz design on the unit square with Dirichlet boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{round, sin, sqrt};

use super::{build_diagonal, DiagonalDesignSpec};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, CscMatrix};
use crate::model::{AffineExpr, DesignBounds, DesignProblem, ObjectiveSpec};

/// Inclusive box of grid indices, `i` along x and `j` along y. Indices refer
/// to the full `grid_n x grid_n` grid, boundary included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexBox {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl IndexBox {
    /// Box covering `[x0, x1] x [y0, y1]` in unit square coordinates, rounded
    /// to the nearest grid lines and pulled off the boundary.
    pub fn from_fractions(grid_n: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let last = grid_n.saturating_sub(1) as f64;
        let snap = |t: f64| (round(t * last) as usize).clamp(1, grid_n.saturating_sub(2).max(1));
        Self { i0: snap(x0), i1: snap(x1), j0: snap(y0), j1: snap(y1) }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        (self.i0..=self.i1).contains(&i) && (self.j0..=self.j1).contains(&j)
    }

    fn check(&self, grid_n: usize, what: &str) -> Result<()> {
        if self.i0 > self.i1 || self.j0 > self.j1 {
            return Err(Error::Domain(format!("{what} box is empty: {self:?}")));
        }
        if self.i0 == 0 || self.j0 == 0 || self.i1 + 1 >= grid_n || self.j1 + 1 >= grid_n {
            return Err(Error::Domain(format!("{what} box {self:?} touches the boundary of a {grid_n} grid")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct HelmholtzConfig {
    pub grid_n: usize,
    /// Angular frequency. The design is parameterized by `theta = (omega/c)^2`
    /// directly, so `omega` only matters when converting back to wave speed.
    pub omega: f64,
    pub source_region: IndexBox,
    pub objective_region: IndexBox,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for HelmholtzConfig {
    fn default() -> Self {
        Self::with_grid(101)
    }
}

impl HelmholtzConfig {
    /// Default regions on an `n x n` grid: a source strip in the left third
    /// and an objective box right of center.
    pub fn with_grid(grid_n: usize) -> Self {
        Self {
            grid_n,
            omega: 4.0 * core::f64::consts::PI,
            source_region: IndexBox::from_fractions(grid_n, 0.1, 1.0 / 3.0, 0.4, 0.6),
            objective_region: IndexBox::from_fractions(grid_n, 0.7, 0.9, 0.4, 0.6),
            theta_min: 1.0,
            theta_max: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 3 {
            return Err(Error::Domain(format!("grid_n = {} (need at least 3)", self.grid_n)));
        }
        if !(self.theta_min.is_finite() && self.theta_max.is_finite() && self.theta_min <= self.theta_max) {
            return Err(Error::Domain(format!("theta range [{}, {}]", self.theta_min, self.theta_max)));
        }
        self.source_region.check(self.grid_n, "source")?;
        self.objective_region.check(self.grid_n, "objective")
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid_n - 1) as f64
    }

    /// Interior unknowns per side.
    pub fn interior(&self) -> usize {
        self.grid_n - 2
    }

    /// Unknown index of interior grid point `(i, j)`, `1 <= i, j <= grid_n - 2`.
    pub fn unknown(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.interior() + (i - 1)
    }

    /// Grid point of unknown `k`.
    pub fn grid_point(&self, k: usize) -> (usize, usize) {
        (k % self.interior() + 1, k / self.interior() + 1)
    }

    /// Wave speed for a design value.
    pub fn speed(&self, theta: f64) -> f64 {
        self.omega / sqrt(theta)
    }

    fn region_indices(&self, r: &IndexBox) -> Vec<usize> {
        let mut out = Vec::new();
        for j in r.j0..=r.j1 {
            for i in r.i0..=r.i1 {
                out.push(self.unknown(i, j));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn source_indices(&self) -> Vec<usize> {
        self.region_indices(&self.source_region)
    }

    pub fn objective_indices(&self) -> Vec<usize> {
        self.region_indices(&self.objective_region)
    }

    /// Diagonal design data: `A` the discrete Laplacian, `b` the indicator of
    /// the source region, `f(z)` the squared field over the objective region.
    pub fn diagonal_spec(&self) -> Result<DiagonalDesignSpec> {
        self.validate()?;
        let n = self.interior() * self.interior();
        let mut b = vec![0.0; n];
        for k in self.source_indices() {
            b[k] = 1.0;
        }
        let obj = AffineExpr::selection(&self.objective_indices(), n);
        Ok(DiagonalDesignSpec {
            a: helmholtz_laplacian(self.grid_n),
            b,
            bounds: DesignBounds::uniform(n, self.theta_min, self.theta_max)?,
            objective: ObjectiveSpec::default().with_quad(1.0, obj),
        })
    }
}

/// Five-point Laplacian over the interior unknowns of a `grid_n x grid_n`
/// grid, boundary values eliminated as zeros.
pub fn helmholtz_laplacian(grid_n: usize) -> CscMatrix {
    let k = grid_n.saturating_sub(2);
    let h = 1.0 / (grid_n - 1) as f64;
    let inv = 1.0 / (h * h);
    let idx = |i: usize, j: usize| j * k + i;
    let mut trip = Vec::with_capacity(5 * k * k);
    for j in 0..k {
        for i in 0..k {
            let r = idx(i, j);
            trip.push((r, r, -4.0 * inv));
            if i > 0 {
                trip.push((r, idx(i - 1, j), inv));
            }
            if i + 1 < k {
                trip.push((r, idx(i + 1, j), inv));
            }
            if j > 0 {
                trip.push((r, idx(i, j - 1), inv));
            }
            if j + 1 < k {
                trip.push((r, idx(i, j + 1), inv));
            }
        }
    }
    CscMatrix::from_triplets(k * k, k * k, &trip)
}

pub fn build_helmholtz(cfg: &HelmholtzConfig) -> Result<DesignProblem> {
    let mut p = build_diagonal(&cfg.diagonal_spec()?)?;
    p.metadata.name = "helmholtz".into();
    p.metadata.description = format!("Helmholtz design on a {0}x{0} grid", cfg.grid_n);
    Ok(p)
}

/// Field at `theta = theta_bar`.
pub fn helmholtz_midpoint(cfg: &HelmholtzConfig) -> Result<Vec<f64>> {
    let spec = cfg.diagonal_spec()?;
    super::diagonal_midpoint(&spec)
}

/// Max-norm truncation error of `(A + theta I) psi - phi` for the smooth
/// pair `psi = sin(pi x) sin(pi y)`, `phi = (theta - 2 pi^2) psi` sampled on
/// the interior of a `grid_n` grid.
pub fn laplacian_truncation_error(grid_n: usize, theta: f64) -> f64 {
    use core::f64::consts::PI;
    let k = grid_n - 2;
    let h = 1.0 / (grid_n - 1) as f64;
    let mut psi = vec![0.0; k * k];
    for j in 0..k {
        for i in 0..k {
            let (x, y) = ((i + 1) as f64 * h, (j + 1) as f64 * h);
            psi[j * k + i] = sin(PI * x) * sin(PI * y);
        }
    }
    let mut r = helmholtz_laplacian(grid_n).mul_vec(&psi);
    for (ri, p) in r.iter_mut().zip(&psi) {
        *ri += theta * p - (theta - 2.0 * PI * PI) * p;
    }
    norm_inf(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_row() {
        let l = helmholtz_laplacian(5);
        // 3x3 interior, center unknown 4, h = 1/4
        assert_eq!(l.get(4, 4), -64.0);
        for nb in [1, 3, 5, 7] {
            assert_eq!(l.get(4, nb), 16.0);
        }
        assert_eq!(l.get(4, 0), 0.0);
    }

    #[test]
    fn default_sizes() {
        let cfg = HelmholtzConfig::default();
        let spec = cfg.diagonal_spec().unwrap();
        assert_eq!(spec.n(), 99 * 99);
        let src = cfg.source_indices();
        for (k, &b) in spec.b.iter().enumerate() {
            assert_eq!(b == 1.0, src.binary_search(&k).is_ok());
        }
    }

    #[test]
    fn boundary_region_rejected() {
        let mut cfg = HelmholtzConfig::with_grid(11);
        cfg.objective_region.i1 = 10;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn index_round_trip() {
        let cfg = HelmholtzConfig::with_grid(7);
        for k in 0..25 {
            let (i, j) = cfg.grid_point(k);
            assert_eq!(cfg.unknown(i, j), k);
        }
    }

    #[test]
    fn second_order_consistency() {
        let e1 = laplacian_truncation_error(21, 1.5);
        let e2 = laplacian_truncation_error(41, 1.5);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
