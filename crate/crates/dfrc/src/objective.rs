//! The weighted radar/communication trade-off objective and its derivatives:
//! Euclidean gradients, Euclidean Hessian directional derivatives, and their
//! Riemannian liftings on the circle x sphere product manifold.
//!
//! The fully-connected structure is the special case of an all-ones connection
//! mask, so a single code path serves both hybrid layouts.

use num_complex::Complex64;
use rand::Rng;

use crate::beamformer::Structure;
use crate::error::{Error, Result};
use crate::manifold::{CirclePoint, SpherePoint, TangentPair};
use crate::numerics::{frob, CMat};
use crate::scene::SystemConfig;

/// The two fully-digital reference precoders the hybrid design is pulled
/// towards.
#[derive(Debug, Clone)]
pub struct ReferencePair {
    pub f_com: CMat,
    pub f_rad: CMat,
}

impl ReferencePair {
    pub fn new(f_com: CMat, f_rad: CMat) -> Result<Self> {
        if f_com.shape() != f_rad.shape() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "reference shapes differ: F_Com {:?} vs F_Rad {:?}",
                    f_com.shape(),
                    f_rad.shape()
                ),
            });
        }
        crate::numerics::check_finite(&f_com)?;
        crate::numerics::check_finite(&f_rad)?;
        Ok(ReferencePair { f_com, f_rad })
    }

    pub fn n_tx(&self) -> usize {
        self.f_com.nrows()
    }

    pub fn n_streams(&self) -> usize {
        self.f_com.ncols()
    }
}

/// Validated trade-off weight `phi` in `[0, 1]`; 1 is communication-only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffConfig {
    pub phi: f64,
}

impl TradeoffConfig {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::Config(format!("phi {phi} must lie in [0, 1]")));
        }
        Ok(TradeoffConfig { phi })
    }
}

/// 0-1 RF-chain-to-antenna connection mask `F_D`.
#[derive(Debug, Clone)]
pub struct ConnectionMask {
    f_d: CMat,
    structure: Structure,
}

impl ConnectionMask {
    /// All-ones mask: every RF chain drives every antenna.
    pub fn fully_connected(n_tx: usize, n_rf: usize) -> Self {
        ConnectionMask {
            f_d: CMat::from_element(n_tx, n_rf, Complex64::new(1.0, 0.0)),
            structure: Structure::FullyConnected,
        }
    }

    /// Block-diagonal mask: RF chain `j` drives antennas `jz..(j+1)z` with
    /// `z = n_tx / n_rf`. Requires `n_rf | n_tx`.
    pub fn partially_connected(n_tx: usize, n_rf: usize) -> Result<Self> {
        if n_rf == 0 || !n_tx.is_multiple_of(n_rf) {
            return Err(Error::Config(format!(
                "partially-connected mask needs n_rf | n_tx, got n_tx={n_tx}, n_rf={n_rf}"
            )));
        }
        let z = n_tx / n_rf;
        let f_d = CMat::from_fn(n_tx, n_rf, |r, c| {
            if r / z == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(ConnectionMask {
            f_d,
            structure: Structure::PartiallyConnected,
        })
    }

    pub fn for_structure(structure: Structure, n_tx: usize, n_rf: usize) -> Result<Self> {
        match structure {
            Structure::FullyConnected => Ok(ConnectionMask::fully_connected(n_tx, n_rf)),
            Structure::PartiallyConnected => ConnectionMask::partially_connected(n_tx, n_rf),
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.f_d
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn n_tx(&self) -> usize {
        self.f_d.nrows()
    }

    pub fn n_rf(&self) -> usize {
        self.f_d.ncols()
    }
}

/// Sphere radius forced on `F_BB` by the partially-connected power identity
/// `||F_RF F_BB||_F^2 = (N_t/N_RF) ||F_BB||_F^2 = N_s`.
pub fn bb_radius(n_tx: usize, n_rf: usize, n_streams: usize) -> f64 {
    ((n_streams * n_rf) as f64 / n_tx as f64).sqrt()
}

/// A point on the product manifold: phase-shifter matrix on the complex
/// circle, digital beamformer on the power sphere.
#[derive(Debug, Clone)]
pub struct PartialPoint {
    pub f_ps: CirclePoint,
    pub f_bb: SpherePoint,
}

impl PartialPoint {
    pub fn new(f_ps: CirclePoint, f_bb: SpherePoint) -> Result<Self> {
        if f_ps.ncols() != f_bb.mat().nrows() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "F_PS has {} columns but F_BB has {} rows",
                    f_ps.ncols(),
                    f_bb.mat().nrows()
                ),
            });
        }
        let expected = bb_radius(f_ps.nrows(), f_ps.ncols(), f_bb.mat().ncols());
        if (f_bb.radius() - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(Error::WrongRadius {
                norm: f_bb.radius(),
                radius: expected,
            });
        }
        Ok(PartialPoint { f_ps, f_bb })
    }

    /// Random initialization: uniform phases, Gaussian digital beamformer
    /// rescaled onto the sphere.
    pub fn random(cfg: &SystemConfig, rng: &mut impl Rng) -> Result<Self> {
        let f_ps = CirclePoint::random(cfg.n_tx, cfg.n_rf, rng);
        let radius = bb_radius(cfg.n_tx, cfg.n_rf, cfg.n_streams);
        let raw = CMat::from_fn(cfg.n_rf, cfg.n_streams, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let f_bb = SpherePoint::rescale(raw, radius)?;
        PartialPoint::new(f_ps, f_bb)
    }

    /// Componentwise retraction of a tangent pair, the product-manifold map.
    pub fn retract(&self, z: &TangentPair, step: f64) -> Result<PartialPoint> {
        Ok(PartialPoint {
            f_ps: self.f_ps.retract(&z.z_ps, step)?,
            f_bb: self.f_bb.retract(&z.z_bb, step)?,
        })
    }

    pub fn zero_tangent(&self) -> TangentPair {
        TangentPair::zeros(
            self.f_ps.nrows(),
            self.f_ps.ncols(),
            self.f_bb.mat().nrows(),
            self.f_bb.mat().ncols(),
        )
    }
}

/// `phi ||F - F_Com||_F^2 + (1 - phi) ||F - F_Rad||_F^2`.
pub fn weighted_objective(f_eff: &CMat, refs: &ReferencePair, phi: f64) -> f64 {
    let com = frob(&(f_eff - &refs.f_com)).powi(2);
    let rad = frob(&(f_eff - &refs.f_rad)).powi(2);
    phi * com + (1.0 - phi) * rad
}

/// Effective transmit precoder `(F_D o F_PS) F_BB` of a partial point.
pub fn effective_from_partial(pt: &PartialPoint, mask: &ConnectionMask) -> CMat {
    mask.mat().component_mul(pt.f_ps.mat()) * pt.f_bb.mat()
}

/// Euclidean gradients at raw (not necessarily feasible) matrices; the
/// embedding-space object the finite-difference oracles differentiate.
pub fn egrad_raw(
    f_ps: &CMat,
    f_bb: &CMat,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
) -> (CMat, CMat) {
    let fe = mask.mat().component_mul(f_ps);
    let f_eff = &fe * f_bb;
    let w = weighted_residual(&f_eff, refs, phi);
    let g_ps = (&w * f_bb.adjoint()).component_mul(mask.mat()).scale(2.0);
    let g_bb = (fe.adjoint() * &w).scale(2.0);
    (g_ps, g_bb)
}

fn weighted_residual(f_eff: &CMat, refs: &ReferencePair, phi: f64) -> CMat {
    (f_eff - &refs.f_com).scale(phi) + (f_eff - &refs.f_rad).scale(1.0 - phi)
}

/// Euclidean gradients `(G_PS, G_BB)` of the trade-off objective at a point.
pub fn egrad_partial(
    pt: &PartialPoint,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
) -> (CMat, CMat) {
    egrad_raw(pt.f_ps.mat(), pt.f_bb.mat(), mask, refs, phi)
}

/// Euclidean Hessian directional derivative at raw matrices.
pub fn ehess_raw(
    f_ps: &CMat,
    f_bb: &CMat,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
    z_ps: &CMat,
    z_bb: &CMat,
) -> (CMat, CMat) {
    let fe = mask.mat().component_mul(f_ps);
    let f_eff = &fe * f_bb;
    let w = weighted_residual(&f_eff, refs, phi);
    let mz = mask.mat().component_mul(z_ps);
    let mixed = &mz * f_bb + &fe * z_bb;
    let h_ps = ((&w * z_bb.adjoint()) + (&mixed * f_bb.adjoint()))
        .component_mul(mask.mat())
        .scale(2.0);
    let h_bb = (mz.adjoint() * &w + fe.adjoint() * &mixed).scale(2.0);
    (h_ps, h_bb)
}

/// Euclidean Hessian directional derivative `(H_PS, H_BB)` along a tangent
/// pair.
pub fn ehess_partial(
    pt: &PartialPoint,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
    z: &TangentPair,
) -> (CMat, CMat) {
    ehess_raw(
        pt.f_ps.mat(),
        pt.f_bb.mat(),
        mask,
        refs,
        phi,
        &z.z_ps,
        &z.z_bb,
    )
}

/// Riemannian gradient: componentwise tangent-space projection of the
/// Euclidean gradients.
pub fn rgrad_partial(
    pt: &PartialPoint,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
) -> TangentPair {
    let (g_ps, g_bb) = egrad_partial(pt, mask, refs, phi);
    TangentPair {
        z_ps: pt.f_ps.project(&g_ps),
        z_bb: pt.f_bb.project(&g_bb),
    }
}

/// Riemannian Hessian along a tangent pair.
pub fn rhess_partial(
    pt: &PartialPoint,
    mask: &ConnectionMask,
    refs: &ReferencePair,
    phi: f64,
    z: &TangentPair,
) -> TangentPair {
    PointData::new(pt, mask, refs, phi).rhess(z)
}

/// MADMM inner-subproblem objective and Euclidean gradient:
/// `g = ||F_target - F_RF F_BB||_F^2`, `Grad g = -2 (F_target - F_RF F_BB) F_BB^H`.
pub fn madmm_sub_value_grad(
    f_rf: &CirclePoint,
    f_target: &CMat,
    f_bb: &CMat,
) -> (f64, CMat) {
    let residual = f_target - f_rf.mat() * f_bb;
    let value = frob(&residual).powi(2);
    let egrad = (residual * f_bb.adjoint()).scale(-2.0);
    (value, egrad)
}

/// Everything the trust-region inner loop needs at one point, computed once:
/// objective value, residuals, Euclidean gradients, Riemannian gradient, and
/// a cached Hessian-vector operator.
pub struct PointData<'a> {
    pt: &'a PartialPoint,
    mask: &'a ConnectionMask,
    fe: CMat,
    w: CMat,
    value: f64,
    egrad_ps: CMat,
    egrad_bb: CMat,
    rgrad: TangentPair,
}

impl<'a> PointData<'a> {
    pub fn new(
        pt: &'a PartialPoint,
        mask: &'a ConnectionMask,
        refs: &'a ReferencePair,
        phi: f64,
    ) -> Self {
        let fe = mask.mat().component_mul(pt.f_ps.mat());
        let f_eff = &fe * pt.f_bb.mat();
        let e_com = &f_eff - &refs.f_com;
        let e_rad = &f_eff - &refs.f_rad;
        let value = phi * frob(&e_com).powi(2) + (1.0 - phi) * frob(&e_rad).powi(2);
        let w = e_com.scale(phi) + e_rad.scale(1.0 - phi);
        let egrad_ps = (&w * pt.f_bb.mat().adjoint())
            .component_mul(mask.mat())
            .scale(2.0);
        let egrad_bb = (fe.adjoint() * &w).scale(2.0);
        let rgrad = TangentPair {
            z_ps: pt.f_ps.project(&egrad_ps),
            z_bb: pt.f_bb.project(&egrad_bb),
        };
        PointData {
            pt,
            mask,
            fe,
            w,
            value,
            egrad_ps,
            egrad_bb,
            rgrad,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rgrad(&self) -> &TangentPair {
        &self.rgrad
    }

    pub fn grad_norm(&self) -> f64 {
        self.rgrad.norm()
    }

    /// Riemannian Hessian-vector product using the cached residuals.
    pub fn rhess(&self, z: &TangentPair) -> TangentPair {
        let fbb = self.pt.f_bb.mat();
        let mz = self.mask.mat().component_mul(&z.z_ps);
        let mixed = &mz * fbb + &self.fe * &z.z_bb;
        let h_ps = ((&self.w * z.z_bb.adjoint()) + (&mixed * fbb.adjoint()))
            .component_mul(self.mask.mat())
            .scale(2.0);
        let h_bb = (mz.adjoint() * &self.w + self.fe.adjoint() * &mixed).scale(2.0);
        TangentPair {
            z_ps: self.pt.f_ps.ehess_to_rhess(&self.egrad_ps, &h_ps, &z.z_ps),
            z_bb: self.pt.f_bb.ehess_to_rhess(&self.egrad_bb, &h_bb, &z.z_bb),
        }
    }

    /// Projects an arbitrary matrix pair onto the tangent space at the point.
    pub fn project(&self, z_ps: &CMat, z_bb: &CMat) -> TangentPair {
        TangentPair {
            z_ps: self.pt.f_ps.project(z_ps),
            z_bb: self.pt.f_bb.project(z_bb),
        }
    }
}
