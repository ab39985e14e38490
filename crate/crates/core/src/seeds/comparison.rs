//! Explicit admissible configuration with a Saturn ring at distance `2σ` from
//! the equator, and its energy by adaptive quadrature.
//!
//! Regions of the quarter plane `D = {ρ > 0, z > 0, ρ² + z² > 1}`:
//! D1 outside `|x| = 2`; D2 outside the disc of radius 1/2 about (1,0);
//! D4 the annulus `4σ < r < 1/2` about (1,0); D5 and D6 the parts of the small
//! disc outside and inside `s < σ` about (1+2σ, 0). In-plane directors are
//! written `n = (cos φ, 0, sin φ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::grid::radial_extension;
use crate::qtensor::{uniaxial, QComponents, Q_INF};
use crate::quadrature::integrate;

/// Largest correlation length for which `σ < 1/8`.
pub fn xi_upper_limit() -> f64 {
    (-4.0f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    D1,
    D2,
    D4,
    D5,
    D6,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::D1, Region::D2, Region::D4, Region::D5, Region::D6];

    pub fn name(self) -> &'static str {
        match self {
            Region::D1 => "D1",
            Region::D2 => "D2",
            Region::D4 => "D4",
            Region::D5 => "D5",
            Region::D6 => "D6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonMap {
    pub xi: f64,
    pub sigma: f64,
}

/// Polar angle about (1,0) where the circle of radius `r` meets the particle.
pub fn theta0(r: f64) -> f64 {
    FRAC_PI_2 + (0.5 * r).asin()
}

const R_D2: f64 = 0.5;

fn theta_b() -> f64 {
    PI - 2f64.atan()
}

/// Boundary phase of D4 on the ray of angle `theta` about (1,0).
fn phase_d4(theta: f64) -> (f64, f64) {
    if theta <= FRAC_PI_2 {
        (FRAC_PI_2 - theta, -1.0)
    } else {
        (2.0 * theta - PI, 2.0)
    }
}

/// Inner radius, inner phase and outer radius of D2 along the ray `theta`,
/// with their `theta` derivatives.
struct D2Ray {
    r_in: f64,
    dr_in: f64,
    phi_in: f64,
    dphi_in: f64,
    r_out: f64,
    dr_out: f64,
}

fn d2_ray(theta: f64) -> D2Ray {
    let (s, c) = theta.sin_cos();
    let (r_in, dr_in) = if theta <= theta0(R_D2) { (R_D2, 0.0) } else { (-2.0 * c, 2.0 * s) };
    let (phi_in, dphi_in) = phase_d4(theta);
    let (r_out, dr_out) = if theta <= theta_b() {
        let q = (c * c + 3.0).sqrt();
        (-c + q, s * (1.0 - c / q))
    } else {
        (-1.0 / c, -s / (c * c))
    };
    D2Ray { r_in, dr_in, phi_in, dphi_in, r_out, dr_out }
}

/// Exit distance `s̄(ϕ)` of D5 from (1+2σ, 0), with derivative and the flag
/// telling whether the exit lies on the particle.
fn s_bar(sigma: f64, phi: f64) -> (f64, f64, bool) {
    let (s, c) = phi.sin_cos();
    let q = (c * c + 3.0).sqrt();
    let circ = sigma * (-2.0 * c + 2.0 * q);
    let dcirc = sigma * (2.0 * s - 2.0 * c * s / q);
    let a = 1.0 + 2.0 * sigma;
    let disc = 1.0 - a * a * s * s;
    if disc >= 0.0 && c < 0.0 {
        let sq = disc.sqrt();
        let sph = -a * c - sq;
        if sph > 0.0 && sph < circ {
            let dsph = a * s + a * a * s * c / sq;
            return (sph, dsph, true);
        }
    }
    (circ, dcirc, false)
}

impl ComparisonMap {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < xi_upper_limit()) {
            return Err(Error::invalid(format!(
                "comparison map needs 0 < xi < e^-4 = {:.5}, got {xi}",
                xi_upper_limit()
            )));
        }
        let raw = 0.5 / (1.0 / xi).ln();
        let sigma = raw.clamp(1.01 * xi, 0.124);
        if sigma != raw {
            log::warn!("sigma clamped from {raw} to {sigma} at xi = {xi}");
        }
        Ok(ComparisonMap { xi, sigma })
    }

    /// Region of a point of the closed quarter plane outside the particle.
    pub fn region(&self, rho: f64, z: f64) -> Region {
        let z = z.abs();
        if rho * rho + z * z >= 4.0 {
            return Region::D1;
        }
        let r = (rho - 1.0).hypot(z);
        if r >= R_D2 {
            Region::D2
        } else if r >= 4.0 * self.sigma {
            Region::D4
        } else if (rho - 1.0 - 2.0 * self.sigma).hypot(z) >= self.sigma {
            Region::D5
        } else {
            Region::D6
        }
    }

    /// Phase of the in-plane director for `z ≥ 0` outside D6.
    fn phase(&self, rho: f64, z: f64) -> f64 {
        match self.region(rho, z) {
            Region::D1 => FRAC_PI_2,
            Region::D2 => {
                let r = (rho - 1.0).hypot(z);
                let theta = z.atan2(rho - 1.0);
                let ray = d2_ray(theta);
                let len = ray.r_out - ray.r_in;
                if len <= 0.0 {
                    return FRAC_PI_2;
                }
                let u = ((ray.r_out - r) / len).clamp(0.0, 1.0);
                FRAC_PI_2 + (ray.phi_in - FRAC_PI_2) * u
            }
            Region::D4 => phase_d4(z.atan2(rho - 1.0)).0,
            Region::D5 | Region::D6 => {
                let dx = rho - 1.0 - 2.0 * self.sigma;
                let s = dx.hypot(z);
                let phi = z.atan2(dx);
                self.beta(s, phi).0
            }
        }
    }

    /// Boundary phase α(ϕ) on `s = s̄(ϕ)` and its derivative.
    fn alpha(&self, phi: f64) -> (f64, f64, f64, f64) {
        let sg = self.sigma;
        let (sb, dsb, on_sphere) = s_bar(sg, phi);
        let (sn, cs) = phi.sin_cos();
        if on_sphere {
            let x = 1.0 + 2.0 * sg + sb * cs;
            let y = sb * sn;
            let dx = dsb * cs - sb * sn;
            let dy = dsb * sn + sb * cs;
            (y.atan2(x), (x * dy - y * dx) / (x * x + y * y), sb, dsb)
        } else {
            let x = 2.0 * sg + sb * cs;
            let y = sb * sn;
            let dx = dsb * cs - sb * sn;
            let dy = dsb * sn + sb * cs;
            let theta = y.atan2(x);
            let dtheta = (x * dy - y * dx) / (x * x + y * y);
            let (a, slope) = phase_d4(theta);
            (a, slope * dtheta, sb, dsb)
        }
    }

    /// Interpolated phase β in D5 (or its inner value for `s < σ`) together with
    /// `∂_s β` and `∂_ϕ β`.
    fn beta(&self, s: f64, phi: f64) -> (f64, f64, f64) {
        let sg = self.sigma;
        if s <= sg {
            return (0.5 * (PI - phi), 0.0, -0.5);
        }
        let (al, dal, sb, dsb) = self.alpha(phi);
        let len = sb - sg;
        let t = ((s - sg) / len).min(1.0);
        let half = 0.5 * (PI - phi);
        let b = (1.0 - t) * half + t * al;
        let bs = (al - half) / len;
        let dt = -(s - sg) * dsb / (len * len);
        let bphi = -0.5 * (1.0 - t) + t * dal + (al - half) * dt;
        (b, bs, bphi)
    }

    /// Value of the map at any point of the cross-section.
    ///
    /// Inside the particle the radial extension is returned; `z < 0` uses the
    /// mirror image.
    pub fn value(&self, rho: f64, z: f64) -> QComponents {
        let rho = rho.abs();
        if rho * rho + z * z <= 1.0 {
            return radial_extension(rho, z);
        }
        let za = z.abs();
        let q = match self.region(rho, za) {
            Region::D1 => Q_INF,
            Region::D6 => {
                let dx = rho - 1.0 - 2.0 * self.sigma;
                let s = dx.hypot(za);
                let phi = za.atan2(dx);
                let lam = (s / self.xi).min(1.0);
                lam * uniaxial([(0.5 * phi).sin(), 0.0, (0.5 * phi).cos()])
            }
            _ => {
                let p = self.phase(rho, za);
                uniaxial([p.cos(), 0.0, p.sin()])
            }
        };
        if z < 0.0 {
            q.mirrored()
        } else {
            q
        }
    }
}

/// Energy of the comparison map over the quarter plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEnergy {
    pub xi: f64,
    pub sigma: f64,
    pub breakdown: EnergyBreakdown,
    /// Totals per region in the order of `Region::ALL`.
    pub regions: [f64; 5],
    /// `total − (π/2) ln(1/ξ) − (π/2) ln ln(1/ξ)`.
    pub remainder: f64,
    pub error_estimate: f64,
}

const TOL: f64 = 1e-9;
const MAX_SEG: usize = 400;

/// In-plane density `(2|∇φ|² + 2cos²φ/ρ²) ρ`, split as (gradient, azimuthal).
fn planar(grad2: f64, phi: f64, rho: f64) -> [f64; 3] {
    let c = phi.cos();
    [2.0 * grad2 * rho, 2.0 * c * c / rho, 0.0]
}

struct Acc {
    parts: [f64; 3],
    err: f64,
    ok: bool,
}

impl Acc {
    fn add(&mut self, q: crate::quadrature::Quad<3>) {
        for k in 0..3 {
            self.parts[k] += q.value[k];
        }
        self.err += q.error;
        self.ok &= q.converged;
    }
}

/// Nested adaptive quadrature of a density on `{(u, v): u ∈ [a, b], v ∈ [lo(u), hi(u)]}`.
fn nested(
    a: f64,
    b: f64,
    bounds: impl Fn(f64) -> (f64, f64),
    density: impl Fn(f64, f64) -> [f64; 3],
    ok: &mut bool,
) -> crate::quadrature::Quad<3> {
    let mut inner_ok = true;
    let q = integrate(
        |u| {
            let (lo, hi) = bounds(u);
            if hi <= lo {
                return [0.0; 3];
            }
            let r = integrate(|v| density(u, v), lo, hi, 1e-13, TOL, MAX_SEG);
            inner_ok &= r.converged;
            r.value
        },
        a,
        b,
        1e-12,
        TOL,
        MAX_SEG,
    );
    *ok &= inner_ok;
    q
}

/// Adaptive per-region quadrature of the comparison map energy.
pub fn comparison_energy(xi: f64) -> Result<ComparisonEnergy> {
    let map = ComparisonMap::new(xi)?;
    let sg = map.sigma;
    let mut regions = [0.0; 5];
    let mut total = Acc { parts: [0.0; 3], err: 0.0, ok: true };

    // D2 in polar coordinates about (1,0), split at the kinks of the boundary data
    let mut d2 = Acc { parts: [0.0; 3], err: 0.0, ok: true };
    let t0 = theta0(R_D2);
    let cuts = [0.0, FRAC_PI_2, t0, theta_b(), 0.75 * PI];
    for w in cuts.windows(2) {
        let mut ok = true;
        let q = nested(
            w[0],
            w[1],
            |th| {
                let ray = d2_ray(th);
                (ray.r_in, ray.r_out)
            },
            |th, r| {
                let ray = d2_ray(th);
                let len = ray.r_out - ray.r_in;
                let amp = ray.phi_in - FRAC_PI_2;
                let u = (ray.r_out - r) / len;
                let phi = FRAC_PI_2 + amp * u;
                let dlen = ray.dr_out - ray.dr_in;
                let du = (ray.dr_out - u * dlen) / len;
                let p_r = -amp / len;
                let p_t = ray.dphi_in * u + amp * du;
                let rho = 1.0 + r * th.cos();
                let grad2 = p_r * p_r + p_t * p_t / (r * r);
                planar(grad2, phi, rho).map(|x| x * r)
            },
            &mut ok,
        );
        d2.ok &= ok;
        d2.add(q);
    }
    regions[1] = d2.parts.iter().sum();

    // D4 in the same polar coordinates
    let mut d4 = Acc { parts: [0.0; 3], err: 0.0, ok: true };
    for (lo_fn, hi_fn) in [
        (Box::new(|_: f64| 0.0) as Box<dyn Fn(f64) -> f64>, Box::new(|_: f64| FRAC_PI_2) as Box<dyn Fn(f64) -> f64>),
        (Box::new(|_: f64| FRAC_PI_2), Box::new(theta0)),
    ] {
        let mut ok = true;
        let q = nested(
            4.0 * sg,
            R_D2,
            |r| (lo_fn(r), hi_fn(r)),
            |r, th| {
                let (phi, slope) = phase_d4(th);
                let rho = 1.0 + r * th.cos();
                planar(slope * slope / (r * r), phi, rho).map(|x| x * r)
            },
            &mut ok,
        );
        d4.ok &= ok;
        d4.add(q);
    }
    regions[2] = d4.parts.iter().sum();

    // D5 in polar coordinates about (1+2σ, 0)
    let mut d5 = Acc { parts: [0.0; 3], err: 0.0, ok: true };
    let phi_turn = theta_b();
    let junction = {
        let t = theta0(4.0 * sg);
        let (s, c) = t.sin_cos();
        (4.0 * sg * s).atan2(4.0 * sg * c - 2.0 * sg)
    };
    let mut cuts = vec![0.0, phi_turn, junction, PI];
    cuts.sort_by(f64::total_cmp);
    for w in cuts.windows(2) {
        let mut ok = true;
        let q = nested(
            w[0],
            w[1],
            |phi| (sg, s_bar(sg, phi).0),
            |phi, s| {
                let (b, bs, bphi) = map.beta(s, phi);
                let rho = 1.0 + 2.0 * sg + s * phi.cos();
                let grad2 = bs * bs + bphi * bphi / (s * s);
                planar(grad2, b, rho).map(|x| x * s)
            },
            &mut ok,
        );
        d5.ok &= ok;
        d5.add(q);
    }
    regions[3] = d5.parts.iter().sum();

    // D6: scaled uniaxial core
    let mut d6 = Acc { parts: [0.0; 3], err: 0.0, ok: true };
    let inv_xi2 = 1.0 / (xi * xi);
    for (a, b) in [(0.0, xi.min(sg)), (xi.min(sg), sg)] {
        let mut ok = true;
        let q = nested(
            a,
            b,
            |_| (0.0, PI),
            |s, phi| {
                let (lam, dlam) = if s < xi { (s / xi, 1.0 / xi) } else { (1.0, 0.0) };
                let rho = 1.0 + 2.0 * sg + s * phi.cos();
                let half = 0.5 * phi;
                let grad = 2.0 / 3.0 * dlam * dlam + lam * lam / (2.0 * s * s);
                let xi_term = 2.0 * lam * lam * half.sin().powi(2) / (rho * rho);
                let l2 = lam * lam;
                let f = -l2 / 3.0 - 2.0 * l2 * lam / 9.0 + l2 * l2 / 3.0 + 2.0 / 9.0;
                [grad * rho * s, xi_term * rho * s, inv_xi2 * f.max(0.0) * rho * s]
            },
            &mut ok,
        );
        d6.ok &= ok;
        d6.add(q);
    }
    regions[4] = d6.parts.iter().sum();

    for acc in [&d2, &d4, &d5, &d6] {
        for k in 0..3 {
            total.parts[k] += acc.parts[k];
        }
        total.err += acc.err;
        total.ok &= acc.ok;
    }
    let breakdown = EnergyBreakdown::new(total.parts[0], total.parts[1], total.parts[2]);
    if !total.ok || total.err > 1e-3 * breakdown.total.abs().max(1.0) {
        return Err(Error::NumericFailure(format!(
            "comparison energy quadrature did not converge at xi = {xi} (error estimate {:.3e})",
            total.err
        )));
    }
    let l = (1.0 / xi).ln();
    let remainder = breakdown.total - FRAC_PI_2 * l - FRAC_PI_2 * l.ln();
    Ok(ComparisonEnergy { xi, sigma: sg, breakdown, regions, remainder, error_estimate: total.err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtensor::{potential, xi_penalty, PotentialParams};

    fn close(a: &QComponents, b: &QComponents) -> f64 {
        (0..5).map(|k| (a.0[k] - b.0[k]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn junction_angle_matches_theta1() {
        let t0 = theta0(0.5);
        let t1 = 2.0 * t0 - PI;
        assert!((t1 - 2.0 * 0.25f64.asin()).abs() < 1e-15);
        let p = (1.0 + 0.5 * t0.cos(), 0.5 * t0.sin());
        assert!((p.0.hypot(p.1) - 1.0).abs() < 1e-14);
        assert!((p.1.atan2(p.0) - t1).abs() < 1e-14);
    }

    #[test]
    fn rejects_large_xi() {
        assert!(ComparisonMap::new(0.1).is_err());
        assert!(ComparisonMap::new(0.0).is_err());
        assert!(comparison_energy(0.02).is_err());
    }

    #[test]
    fn region_examples() {
        let m = ComparisonMap::new(1e-3).unwrap();
        assert_eq!(m.region(3.0, 3.0), Region::D1);
        assert_eq!(m.value(3.0, 3.0), Q_INF);
        assert_eq!(m.region(0.2, 1.5), Region::D2);
        assert_eq!(m.region(1.35, 0.2), Region::D4);
        assert_eq!(m.region(1.0 + 2.0 * m.sigma, 0.0), Region::D6);
    }

    #[test]
    fn core_is_scaled_by_lambda() {
        let xi = 1e-3;
        let m = ComparisonMap::new(xi).unwrap();
        let c = 1.0 + 2.0 * m.sigma;
        let q = m.value(c + 0.5 * xi * 0.6, 0.5 * xi * 0.8);
        let full = (2.0f64 / 3.0).sqrt();
        assert!((q.norm() - 0.5 * full).abs() < 1e-12);
    }

    #[test]
    fn matches_anchoring_on_particle() {
        let m = ComparisonMap::new(1e-3).unwrap();
        for k in 1..200 {
            let t = FRAC_PI_2 * k as f64 / 200.0;
            let (z, rho) = t.sin_cos();
            let eps = 1e-12;
            let q = m.value(rho * (1.0 + eps), z * (1.0 + eps));
            let want = radial_extension(rho, z);
            assert!(close(&q, &want) < 1e-8, "angle {t}: {q:?} vs {want:?}");
        }
    }

    #[test]
    fn e3_is_eigenvector_on_equator() {
        let m = ComparisonMap::new(1e-3).unwrap();
        for k in 0..400 {
            let rho = 1.0 + 3.0 * (k as f64 + 0.5) / 400.0;
            let q = m.value(rho, 0.0);
            assert!(q.0[3].abs() < 1e-12 && q.0[4].abs() < 1e-12, "rho {rho}: {q:?}");
        }
    }

    #[test]
    fn continuous_across_interfaces() {
        let m = ComparisonMap::new(1e-3).unwrap();
        let sg = m.sigma;
        let eps = 1e-11;
        let mut worst: f64 = 0.0;
        let n = 2000;
        for k in 1..n {
            let u = k as f64 / n as f64;
            // |x| = 2
            let t = FRAC_PI_2 * u;
            let (s, c) = t.sin_cos();
            worst = worst.max(close(&m.value(2.0 * c * (1.0 + eps), 2.0 * s * (1.0 + eps)), &m.value(2.0 * c * (1.0 - eps), 2.0 * s * (1.0 - eps))));
            // circles about (1,0) with radius 1/2 and 4σ
            for r in [R_D2, 4.0 * sg] {
                let th = theta0(r) * u;
                let (s, c) = th.sin_cos();
                let a = m.value(1.0 + (r + eps) * c, (r + eps) * s);
                let b = m.value(1.0 + (r - eps) * c, (r - eps) * s);
                worst = worst.max(close(&a, &b));
            }
            // s = σ about (1+2σ, 0)
            let ph = PI * u;
            let (s, c) = ph.sin_cos();
            let a = m.value(1.0 + 2.0 * sg + (sg + eps) * c, (sg + eps) * s);
            let b = m.value(1.0 + 2.0 * sg + (sg - eps) * c, (sg - eps) * s);
            worst = worst.max(close(&a, &b));
        }
        assert!(worst < 1e-8, "max jump {worst}");
    }

    #[test]
    fn quadrature_matches_pointwise_density() {
        // sample density on a polar grid inside D4 and compare against the
        // quadrature of the azimuthal part with a crude Riemann sum
        let xi = 1e-3;
        let m = ComparisonMap::new(xi).unwrap();
        let p = PotentialParams::new(xi).unwrap();
        let (a, b) = (4.0 * m.sigma, 0.5);
        let n = 400;
        let mut sum = 0.0;
        for i in 0..n {
            let r = a + (b - a) * (i as f64 + 0.5) / n as f64;
            let top = theta0(r);
            for j in 0..n {
                let th = top * (j as f64 + 0.5) / n as f64;
                let (rho, z) = (1.0 + r * th.cos(), r * th.sin());
                let q = m.value(rho, z);
                assert!(potential(&q, &p).abs() < 1e-12);
                sum += xi_penalty(&q) / rho * r * (b - a) / n as f64 * top / n as f64;
            }
        }
        let mut ok = true;
        let q = nested(
            a,
            b,
            |r| (0.0, theta0(r)),
            |r, th| {
                let rho = 1.0 + r * th.cos();
                planar(0.0, phase_d4(th).0, rho).map(|x| x * r)
            },
            &mut ok,
        );
        assert!(ok);
        assert!(((q.value[1] - sum) / sum).abs() < 1e-3);
    }

    #[test]
    fn d4_bound() {
        for xi in [1e-2, 1e-3, 1e-4] {
            let e = comparison_energy(xi).unwrap();
            let c4 = e.regions[2] - PI * (1.0 / e.sigma).ln();
            assert!(c4 < 5.0, "C4 = {c4} at xi = {xi}");
            assert_eq!(e.regions[0], 0.0);
        }
    }
}
