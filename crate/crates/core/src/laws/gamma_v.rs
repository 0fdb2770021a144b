//! `Γ_V` laws: densities `t^(α-1) e^(-V(t)) / Γ_V(α)` on the positive axis.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Gamma};

use super::LawError;

/// Knots of the inverse-CDF grid.
pub const GRID_KNOTS: usize = 4096;
const TAIL_REL: f64 = 1e-14;
const QUAD_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "snake_case")]
pub enum Potential {
    /// `V(t) = t`.
    Gaussian,
    /// `V(t) = -(2n-1) log(1-t)` on `(0, 1)`.
    Truncated { n: usize },
    /// `V(t) = 2(N+1) log(1+t)`.
    Spherical { n: usize },
}

impl Potential {
    pub fn v(&self, t: f64) -> f64 {
        match *self {
            Potential::Gaussian => t,
            Potential::Truncated { n } => {
                if t < 1.0 {
                    -((2 * n) as f64 - 1.0) * (-t).ln_1p()
                } else {
                    f64::INFINITY
                }
            }
            Potential::Spherical { n } => 2.0 * (n as f64 + 1.0) * t.ln_1p(),
        }
    }

    fn bounded(&self) -> bool {
        matches!(self, Potential::Truncated { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaVSpec {
    pub potential: Potential,
    pub alpha: f64,
}

impl GammaVSpec {
    pub fn new(potential: Potential, alpha: f64) -> Self {
        GammaVSpec { potential, alpha }
    }

    /// CDF of the matching named law: gamma, beta or beta-prime.
    pub fn closed_form_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        match self.potential {
            Potential::Gaussian => Gamma::new(a, 1.0).unwrap().cdf(t),
            Potential::Truncated { n } => Beta::new(a, 2.0 * n as f64).unwrap().cdf(t.min(1.0)),
            Potential::Spherical { n } => {
                let b = 2.0 * n as f64 + 2.0 - a;
                Beta::new(a, b).unwrap().cdf(t / (1.0 + t))
            }
        }
    }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod by bisection.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: (f64, f64),
        abs_tol: f64,
        rel_tol: f64,
        depth: u32,
    ) -> f64 {
        let (k, err) = whole;
        if depth == 0 || err <= abs_tol.max(rel_tol * k.abs()) {
            return k;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, left, 0.5 * abs_tol, rel_tol, depth - 1)
            + rec(f, m, b, right, 0.5 * abs_tol, rel_tol, depth - 1)
    }
    rec(f, a, b, gk15(f, a, b), abs_tol, rel_tol, 40)
}

/// Numerical `Γ_V` law with an inverse-CDF grid for sampling.
#[derive(Debug, Clone)]
pub struct GammaVLaw {
    spec: GammaVSpec,
    /// `max log(t^(α-1) e^(-V))`, factored out of every integrand.
    log_peak: f64,
    /// `ln Γ_V(α)`.
    log_norm: f64,
    /// Scale of the map `t = c s / (1 - s)`; unused for bounded support.
    c: f64,
    /// Unnormalized cumulative mass at knots `k / GRID_KNOTS` in `s`.
    cum: Vec<f64>,
}

impl GammaVLaw {
    pub fn new(spec: GammaVSpec) -> Result<Self, LawError> {
        let a = spec.alpha;
        if !(a > 0.0) {
            return Err(LawError::InvalidParameter(format!("alpha = {a}")));
        }
        let pot = spec.potential;
        let log_kernel = |t: f64| (a - 1.0) * t.ln() - pot.v(t);
        // mode by golden section in log t
        let (mut lo, mut hi) = if pot.bounded() {
            (-40.0, 0.0)
        } else {
            (-40.0, 40.0)
        };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let g = |x: f64| {
            let t = x.exp();
            if pot.bounded() && t >= 1.0 {
                f64::NEG_INFINITY
            } else {
                log_kernel(t)
            }
        };
        for _ in 0..200 {
            let x1 = hi - phi * (hi - lo);
            let x2 = lo + phi * (hi - lo);
            if g(x1) < g(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        let mode = (0.5 * (lo + hi))
            .exp()
            .min(if pot.bounded() { 1.0 - 1e-12 } else { f64::MAX });
        let log_peak = log_kernel(mode);
        let scaled = move |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let v = (log_kernel(t) - log_peak).exp();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };

        let mass = if pot.bounded() {
            integrate(&scaled, 0.0, 1.0, 0.0, QUAD_REL)
        } else {
            let mut total = 0.0;
            let mut lo = 0.0;
            let mut hi = mode.max(1.0);
            let mut converged = false;
            for _ in 0..400 {
                let piece = integrate(&scaled, lo, hi, 0.0, QUAD_REL);
                total += piece;
                if hi > mode && piece <= TAIL_REL * total {
                    converged = true;
                    break;
                }
                lo = hi;
                hi *= 2.0;
            }
            if !converged || !total.is_finite() {
                return Err(LawError::Divergent { alpha: a });
            }
            total
        };
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(LawError::Divergent { alpha: a });
        }

        let mut law = GammaVLaw {
            spec,
            log_peak,
            log_norm: log_peak + mass.ln(),
            c: mode.max(1e-3),
            cum: Vec::new(),
        };
        let mut cum = Vec::with_capacity(GRID_KNOTS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..GRID_KNOTS {
            let (s0, s1) = (
                k as f64 / GRID_KNOTS as f64,
                (k + 1) as f64 / GRID_KNOTS as f64,
            );
            acc += integrate(&|s| law.h(s), s0, s1, 0.0, QUAD_REL);
            cum.push(acc);
        }
        law.cum = cum;
        Ok(law)
    }

    pub fn spec(&self) -> GammaVSpec {
        self.spec
    }

    /// `Γ_V(α)`.
    pub fn normalization(&self) -> f64 {
        self.log_norm.exp()
    }

    fn t_of_s(&self, s: f64) -> f64 {
        if self.spec.potential.bounded() {
            s
        } else {
            self.c * s / (1.0 - s)
        }
    }

    fn s_of_t(&self, t: f64) -> f64 {
        if self.spec.potential.bounded() {
            t.clamp(0.0, 1.0)
        } else {
            t / (self.c + t)
        }
    }

    /// Peak-scaled density in the `s` variable.
    fn h(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let a = self.spec.alpha;
        let t = self.t_of_s(s);
        let mut log = (a - 1.0) * t.ln() - self.spec.potential.v(t) - self.log_peak;
        if !self.spec.potential.bounded() {
            log += self.c.ln() - 2.0 * (1.0 - s).ln();
        }
        let v = log.exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 || (self.spec.potential.bounded() && t >= 1.0) {
            return 0.0;
        }
        let a = self.spec.alpha;
        ((a - 1.0) * t.ln() - self.spec.potential.v(t) - self.log_norm).exp()
    }

    fn total(&self) -> f64 {
        self.cum[GRID_KNOTS]
    }

    fn cdf_s(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let k = ((s * GRID_KNOTS as f64) as usize).min(GRID_KNOTS - 1);
        let s0 = k as f64 / GRID_KNOTS as f64;
        let part = integrate(&|x| self.h(x), s0, s, 0.0, QUAD_REL);
        ((self.cum[k] + part) / self.total()).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.cdf_s(self.s_of_t(t))
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let target = u * self.total();
        let k = self
            .cum
            .partition_point(|&c| c <= target)
            .clamp(1, GRID_KNOTS)
            - 1;
        let (x0, x1) = (self.cum[k], self.cum[k + 1]);
        let (y0, y1) = (
            k as f64 / GRID_KNOTS as f64,
            (k + 1) as f64 / GRID_KNOTS as f64,
        );
        let (d0, d1) = (1.0 / self.h(y0), 1.0 / self.h(y1));
        let width = x1 - x0;
        let s = if width > 0.0 && d0.is_finite() && d1.is_finite() {
            // monotone cubic Hermite (Fritsch–Carlson) on the inverse
            let delta = (y1 - y0) / width;
            let (mut m0, mut m1) = (d0, d1);
            let (a, b) = (m0 / delta, m1 / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m0 = tau * a * delta;
                m1 = tau * b * delta;
            }
            let x = (target - x0) / width;
            let (x2, x3) = (x * x, x * x * x);
            (2.0 * x3 - 3.0 * x2 + 1.0) * y0
                + (x3 - 2.0 * x2 + x) * width * m0
                + (-2.0 * x3 + 3.0 * x2) * y1
                + (x3 - x2) * width * m1
        } else {
            // tail knots: bisect on the exact CDF
            let (mut lo, mut hi) = (y0, y1);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.cdf_s(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        self.t_of_s(s.clamp(y0, y1))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

pub fn gamma_v_pdf(spec: GammaVSpec, t: f64) -> Result<f64, LawError> {
    Ok(GammaVLaw::new(spec)?.pdf(t))
}

pub fn gamma_v_cdf(spec: GammaVSpec, t: f64) -> Result<f64, LawError> {
    Ok(GammaVLaw::new(spec)?.cdf(t))
}

/// One draw; builds the law each call, so reuse a [`GammaVLaw`] for batches.
pub fn gamma_v_sample<R: Rng + ?Sized>(spec: GammaVSpec, rng: &mut R) -> Result<f64, LawError> {
    Ok(GammaVLaw::new(spec)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::ks_statistic;
    use crate::rng::trial_rng;

    fn sup_gap(law: &GammaVLaw, hi: f64) -> f64 {
        (1..2000)
            .map(|i| {
                let t = hi * i as f64 / 2000.0;
                (law.cdf(t) - law.spec().closed_form_cdf(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn kronrod_polynomial_exact() {
        let v = integrate(&|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 0.0, 1e-14);
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_matches_gamma() {
        for a in [1.0, 2.0, 4.0, 16.0] {
            let law = GammaVLaw::new(GammaVSpec::new(Potential::Gaussian, a)).unwrap();
            assert!(sup_gap(&law, 4.0 * a + 20.0) < 1e-8, "alpha {a}");
            let gamma_a = statrs::function::gamma::gamma(a);
            assert!((law.normalization() - gamma_a).abs() < 1e-10 * gamma_a);
        }
    }

    #[test]
    fn truncated_matches_beta() {
        let law = GammaVLaw::new(GammaVSpec::new(Potential::Truncated { n: 1 }, 2.0)).unwrap();
        assert!(sup_gap(&law, 1.0) < 1e-6);
        let law = GammaVLaw::new(GammaVSpec::new(Potential::Truncated { n: 2 }, 4.0)).unwrap();
        assert!(sup_gap(&law, 1.0) < 1e-6);
    }

    #[test]
    fn spherical_matches_beta_prime() {
        let law = GammaVLaw::new(GammaVSpec::new(Potential::Spherical { n: 1 }, 2.0)).unwrap();
        // pdf ∝ t/(1+t)^4 has mass 1/6
        assert!((law.normalization() - 1.0 / 6.0).abs() < 1e-8);
        let mass = integrate(&|t| law.pdf(t), 0.0, 1e4, 0.0, 1e-13)
            + integrate(&|t| law.pdf(t), 1e4, 1e8, 0.0, 1e-13);
        assert!((mass - 1.0).abs() < 1e-8);
        assert!(sup_gap(&law, 50.0) < 1e-8);
        let law = GammaVLaw::new(GammaVSpec::new(Potential::Spherical { n: 2 }, 4.0)).unwrap();
        assert!(sup_gap(&law, 200.0) < 1e-8);
    }

    #[test]
    fn divergent_spherical() {
        // t^(α-1) (1+t)^-(2N+2) is not integrable for α >= 2N+2
        let e = GammaVLaw::new(GammaVSpec::new(Potential::Spherical { n: 1 }, 4.0));
        assert!(matches!(e, Err(LawError::Divergent { .. })));
    }

    #[test]
    fn quantile_inverts_cdf() {
        for spec in [
            GammaVSpec::new(Potential::Gaussian, 3.0),
            GammaVSpec::new(Potential::Truncated { n: 2 }, 2.0),
            GammaVSpec::new(Potential::Spherical { n: 2 }, 2.0),
        ] {
            let law = GammaVLaw::new(spec).unwrap();
            for i in 1..200 {
                let u = i as f64 / 200.0;
                assert!(
                    (law.cdf(law.quantile(u)) - u).abs() < 1e-7,
                    "{spec:?} u={u}"
                );
            }
        }
    }

    #[test]
    fn samples_follow_law() {
        let spec = GammaVSpec::new(Potential::Spherical { n: 1 }, 2.0);
        let law = GammaVLaw::new(spec).unwrap();
        let mut rng = trial_rng(9, 0, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| law.sample(&mut rng)).collect();
        let r = ks_statistic(&xs, |t| spec.closed_form_cdf(t)).unwrap();
        assert!(r.p_value > 1e-3, "{r:?}");
    }
}
