//! Geometry layer: the complex-circle manifold of unit-modulus matrices, the
//! scaled sphere of Frobenius-norm-constrained matrices, and their product.
//!
//! Retractions are the normalization maps (entrywise for the circle, global
//! for the sphere); both are second-order, which the Taylor tests in the
//! objective layer rely on. Euclidean-to-Riemannian Hessian conversions carry
//! the classical submanifold curvature correction: note the minus sign and the
//! `1/radius^2` factor in the sphere formulas, both required on a sphere of
//! non-unit radius (the finite-difference oracles arbitrate).

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numerics::{frob, CMat};

/// Entry-modulus tolerance for [`CirclePoint`] and radius tolerance for
/// [`SpherePoint`] construction.
pub const MANIFOLD_ATOL: f64 = 1e-12;

/// A matrix with every entry on the complex unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoint {
    p: CMat,
}

impl CirclePoint {
    /// Validates `| |P(i,j)| - 1 | <= 1e-12` for every entry.
    pub fn new(p: CMat) -> Result<Self> {
        for r in 0..p.nrows() {
            for c in 0..p.ncols() {
                let modulus = p[(r, c)].norm();
                if (modulus - 1.0).abs() > MANIFOLD_ATOL || !modulus.is_finite() {
                    return Err(Error::NotUnitModulus {
                        row: r,
                        col: c,
                        modulus,
                    });
                }
            }
        }
        Ok(CirclePoint { p })
    }

    /// Point with the given phases (radians).
    pub fn from_phases(rows: usize, cols: usize, phases: &[f64]) -> Result<Self> {
        if phases.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: format!("expected {} phases, got {}", rows * cols, phases.len()),
            });
        }
        Ok(CirclePoint {
            p: CMat::from_fn(rows, cols, |r, c| {
                Complex64::from_polar(1.0, phases[r * cols + c])
            }),
        })
    }

    /// Uniform random phases from the provided generator.
    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        CirclePoint {
            p: CMat::from_fn(rows, cols, |_, _| {
                Complex64::from_polar(1.0, rng.gen::<f64>() * TAU)
            }),
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.p
    }

    pub fn into_mat(self) -> CMat {
        self.p
    }

    pub fn nrows(&self) -> usize {
        self.p.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.p.ncols()
    }

    /// Tangent-space projection `V - Re(V conj(P)) o P`.
    pub fn project(&self, v: &CMat) -> CMat {
        let mut out = v.clone();
        for (o, &p) in out.iter_mut().zip(self.p.iter()) {
            let radial = (*o * p.conj()).re;
            *o -= Complex64::new(radial, 0.0) * p;
        }
        out
    }

    /// Entrywise normalization retraction `(P + step V) / |P + step V|`.
    ///
    /// Errors with the offending index if any entry of `P + step V` vanishes.
    pub fn retract(&self, v: &CMat, step: f64) -> Result<CirclePoint> {
        let mut out = &self.p + v.scale(step);
        for r in 0..out.nrows() {
            for c in 0..out.ncols() {
                let m = out[(r, c)].norm();
                if m == 0.0 || !m.is_finite() {
                    return Err(Error::ZeroEntry { row: r, col: c });
                }
                out[(r, c)] /= Complex64::new(m, 0.0);
            }
        }
        Ok(CirclePoint { p: out })
    }

    /// Riemannian Hessian from Euclidean data:
    /// `Proj(ehess_dir - Re(egrad* o P) o z)`.
    pub fn ehess_to_rhess(&self, egrad: &CMat, ehess_dir: &CMat, z: &CMat) -> CMat {
        let mut corrected = ehess_dir.clone();
        for ((o, &g), (&p, &zv)) in corrected
            .iter_mut()
            .zip(egrad.iter())
            .zip(self.p.iter().zip(z.iter()))
        {
            let radial = (g.conj() * p).re;
            *o -= Complex64::new(radial, 0.0) * zv;
        }
        self.project(&corrected)
    }

    /// Largest entrywise tangency defect `max |Re(v o conj(P))|`.
    pub fn tangency_violation(&self, v: &CMat) -> f64 {
        v.iter()
            .zip(self.p.iter())
            .map(|(&x, &p)| (x * p.conj()).re.abs())
            .fold(0.0, f64::max)
    }

    /// Worst deviation of any entry modulus from 1.
    pub fn modulus_violation(&self) -> f64 {
        self.p
            .iter()
            .map(|e| (e.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// A matrix constrained to Frobenius norm `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    f: CMat,
    radius: f64,
}

impl SpherePoint {
    /// Validates `| ||F||_F - radius | <= 1e-12`.
    pub fn new(f: CMat, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("sphere radius {radius} must be positive")));
        }
        let norm = frob(&f);
        if (norm - radius).abs() > MANIFOLD_ATOL * radius.max(1.0) {
            return Err(Error::WrongRadius { norm, radius });
        }
        Ok(SpherePoint { f, radius })
    }

    /// Projects an arbitrary nonzero matrix onto the sphere.
    pub fn rescale(f: CMat, radius: f64) -> Result<Self> {
        let norm = frob(&f);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroMatrix);
        }
        Ok(SpherePoint {
            f: f.scale(radius / norm),
            radius,
        })
    }

    pub fn mat(&self) -> &CMat {
        &self.f
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Tangent-space projection `V - (Re tr(F^H V) / ||F||_F^2) F`.
    pub fn project(&self, v: &CMat) -> CMat {
        let radial = inner_re(&self.f, v) / self.f.norm_squared();
        v - self.f.scale(radial)
    }

    /// Normalization retraction `radius (F + step V) / ||F + step V||_F`.
    pub fn retract(&self, v: &CMat, step: f64) -> Result<SpherePoint> {
        let moved = &self.f + v.scale(step);
        SpherePoint::rescale(moved, self.radius)
    }

    /// Riemannian Hessian from Euclidean data:
    /// `Proj(ehess_dir) - (Re tr(F^H egrad) / ||F||_F^2) z`.
    pub fn ehess_to_rhess(&self, egrad: &CMat, ehess_dir: &CMat, z: &CMat) -> CMat {
        let radial = inner_re(&self.f, egrad) / self.f.norm_squared();
        self.project(ehess_dir) - z.scale(radial)
    }

    /// Normalized tangency defect `|Re tr(F^H v)| / (||F|| ||v||)`.
    pub fn tangency_violation(&self, v: &CMat) -> f64 {
        let scale = frob(&self.f) * frob(v);
        if scale == 0.0 {
            0.0
        } else {
            inner_re(&self.f, v).abs() / scale
        }
    }

    /// Deviation of the Frobenius norm from the radius.
    pub fn radius_violation(&self) -> f64 {
        (frob(&self.f) - self.radius).abs()
    }
}

/// `Re tr(A^H B)`, the real inner product both manifolds use.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x.conj() * y).re).sum()
}

/// A tangent vector on the product manifold: the circle component pairs with
/// `F_PS`, the sphere component with `F_BB`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub z_ps: CMat,
    pub z_bb: CMat,
}

impl TangentPair {
    pub fn zeros(ps_rows: usize, ps_cols: usize, bb_rows: usize, bb_cols: usize) -> Self {
        TangentPair {
            z_ps: CMat::zeros(ps_rows, ps_cols),
            z_bb: CMat::zeros(bb_rows, bb_cols),
        }
    }

    pub fn scale(&self, s: f64) -> TangentPair {
        TangentPair {
            z_ps: self.z_ps.scale(s),
            z_bb: self.z_bb.scale(s),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &TangentPair) -> TangentPair {
        TangentPair {
            z_ps: &self.z_ps + other.z_ps.scale(s),
            z_bb: &self.z_bb + other.z_bb.scale(s),
        }
    }

    pub fn norm(&self) -> f64 {
        product_inner(self, self).sqrt()
    }
}

/// Product-manifold inner product: the sum of the componentwise
/// `Re tr(x^H y)` terms.
pub fn product_inner(x: &TangentPair, y: &TangentPair) -> f64 {
    inner_re(&x.z_ps, &y.z_ps) + inner_re(&x.z_bb, &y.z_bb)
}
