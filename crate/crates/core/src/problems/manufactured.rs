//! Closed-form streamfunctions with analytic derivatives.
//!
//! Every catalog entry is a product `X(x) Y(y)`, so any mixed partial is
//! `X^(a)(x) Y^(b)(y)`. The one-dimensional factors are carried as
//! [`Jet`]s holding the value and the first four derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::argyris::{Derivs, SmoothFunction};
use crate::error::{Error, Result};

/// Value and derivatives of orders 1 to 4 of a function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; 5]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0, 0.0])
    }

    /// The identity `t -> t` at `t`.
    pub fn var(t: f64) -> Self {
        Jet([t, 1.0, 0.0, 0.0, 0.0])
    }

    /// `sin(k t)`.
    pub fn sin(k: f64, t: f64) -> Self {
        let (s, c) = (k * t).sin_cos();
        Jet([s, k * c, -k * k * s, -k.powi(3) * c, k.powi(4) * s])
    }

    /// `cos(k t)`.
    pub fn cos(k: f64, t: f64) -> Self {
        let (s, c) = (k * t).sin_cos();
        Jet([c, -k * s, -k * k * c, k.powi(3) * s, k.powi(4) * c])
    }

    /// `exp(r t)`.
    pub fn exp(r: f64, t: f64) -> Self {
        let e = (r * t).exp();
        Jet([e, r * e, r * r * e, r.powi(3) * e, r.powi(4) * e])
    }

    /// `sum_k c_k t^k`.
    pub fn poly(coeffs: &[f64], t: f64) -> Self {
        let mut out = [0.0; 5];
        for (n, o) in out.iter_mut().enumerate() {
            for (k, &c) in coeffs.iter().enumerate().skip(n) {
                let falling: f64 = (0..n).map(|i| (k - i) as f64).product();
                *o += c * falling * t.powi((k - n) as i32);
            }
        }
        Jet(out)
    }

    /// Derivative of order `n <= 4`.
    pub fn d(&self, n: usize) -> f64 {
        self.0[n]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|v| -v))
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet(self.0.map(|v| s * v))
    }
}

/// Leibniz rule.
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        const BINOM: [[f64; 5]; 5] = [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 3.0, 1.0, 0.0],
            [1.0, 4.0, 6.0, 4.0, 1.0],
        ];
        Jet(std::array::from_fn(|n| {
            (0..=n).map(|k| BINOM[n][k] * self.0[k] * o.0[n - k]).sum()
        }))
    }
}

type Factor = Box<dyn Fn(f64) -> Jet + Send + Sync>;

/// Derivatives of a streamfunction at one point, as needed by the model
/// operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub psi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
    pub psi_xx: f64,
    pub psi_xy: f64,
    pub psi_yy: f64,
    pub lap: f64,
    pub lap_x: f64,
    pub lap_y: f64,
    pub bilap: f64,
}

/// Identifiers accepted by [`manufactured`].
pub const SOLUTION_IDS: [&str; 5] = [
    "biharmonic-square",
    "stommel-vallis",
    "stommel-myers",
    "cascon-sin",
    "cascon-exp",
];

/// A separable exact solution `psi(x, y) = X(x) Y(y)` on `[0, lx] x [0, ly]`.
pub struct ManufacturedSolution {
    id: String,
    lx: f64,
    ly: f64,
    homogeneous: bool,
    x: Factor,
    y: Factor,
}

impl fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("id", &self.id)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .field("homogeneous", &self.homogeneous)
            .finish()
    }
}

impl ManufacturedSolution {
    pub fn new<X, Y>(id: &str, lx: f64, ly: f64, homogeneous: bool, x: X, y: Y) -> Self
    where
        X: Fn(f64) -> Jet + Send + Sync + 'static,
        Y: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            lx,
            ly,
            homogeneous,
            x: Box::new(x),
            y: Box::new(y),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// `(lx, ly)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    /// Whether `psi` and its normal derivative vanish on the boundary.
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn jets(&self, x: f64, y: f64) -> (Jet, Jet) {
        ((self.x)(x), (self.y)(y))
    }

    /// `d^a/dx^a d^b/dy^b psi` for `a, b <= 4`.
    pub fn partial(&self, a: usize, b: usize, x: f64, y: f64) -> f64 {
        let (jx, jy) = self.jets(x, y);
        jx.d(a) * jy.d(b)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.partial(0, 0, x, y)
    }

    pub fn partials(&self, x: f64, y: f64) -> Partials {
        let (jx, jy) = self.jets(x, y);
        let p = |a: usize, b: usize| jx.d(a) * jy.d(b);
        Partials {
            psi: p(0, 0),
            psi_x: p(1, 0),
            psi_y: p(0, 1),
            psi_xx: p(2, 0),
            psi_xy: p(1, 1),
            psi_yy: p(0, 2),
            lap: p(2, 0) + p(0, 2),
            lap_x: p(3, 0) + p(1, 2),
            lap_y: p(2, 1) + p(0, 3),
            bilap: p(4, 0) + 2.0 * p(2, 2) + p(0, 4),
        }
    }
}

impl SmoothFunction for ManufacturedSolution {
    fn derivs(&self, x: f64, y: f64) -> Derivs {
        let (jx, jy) = self.jets(x, y);
        let p = |a: usize, b: usize| jx.d(a) * jy.d(b);
        [p(0, 0), p(1, 0), p(0, 1), p(2, 0), p(1, 1), p(0, 2)]
    }
}

/// `x^2 (x - 1)^2`.
fn quartic_bump(t: f64) -> Jet {
    Jet::poly(&[0.0, 0.0, 1.0, -2.0, 1.0], t)
}

/// Looks up a catalog entry. `eps_s` is the Stommel number of the
/// boundary-layer solutions (`stommel-vallis` defaults to 0.04,
/// `stommel-myers` to 0.05); the other entries ignore it.
pub fn manufactured(id: &str, eps_s: Option<f64>) -> Result<ManufacturedSolution> {
    let check = |e: f64| {
        if e > 0.0 && e.is_finite() {
            Ok(e)
        } else {
            Err(Error::InvalidParameter(format!(
                "Stommel number must be positive, got {e}"
            )))
        }
    };
    match id {
        "biharmonic-square" => Ok(ManufacturedSolution::new(
            id,
            1.0,
            1.0,
            true,
            quartic_bump,
            quartic_bump,
        )),
        "stommel-vallis" => {
            let eps = check(eps_s.unwrap_or(0.04))?;
            Ok(ManufacturedSolution::new(
                id,
                1.0,
                1.0,
                false,
                move |x| Jet::constant(1.0) - Jet::var(x) - Jet::exp(-1.0 / eps, x),
                |y| Jet::sin(PI, y),
            ))
        }
        "stommel-myers" => {
            let eps = check(eps_s.unwrap_or(0.05))?;
            let disc = (1.0 + 4.0 * PI * PI * eps * eps).sqrt();
            let r1 = (-1.0 + disc) / (2.0 * eps);
            let r2 = (-1.0 - disc) / (2.0 * eps);
            let (e1, e2) = (r1.exp(), r2.exp());
            let scale = 1.0 / (PI * (1.0 + 4.0 * PI * PI * eps * eps));
            Ok(ManufacturedSolution::new(
                id,
                1.0,
                1.0,
                true,
                move |x| {
                    let layer = (Jet::exp(r1, x) * (1.0 + e2) - Jet::exp(r2, x) * (1.0 + e1))
                        * (1.0 / (e1 - e2));
                    (Jet::sin(PI, x) * (2.0 * PI * eps) + Jet::cos(PI, x) + layer) * scale
                },
                |y| Jet::sin(PI, y),
            ))
        }
        "cascon-sin" => Ok(ManufacturedSolution::new(
            id,
            3.0,
            1.0,
            true,
            |x| {
                let s = Jet::sin(PI / 3.0, x);
                s * s
            },
            |y| {
                let s = Jet::sin(PI, y);
                s * s
            },
        )),
        "cascon-exp" => Ok(ManufacturedSolution::new(
            id,
            3.0,
            1.0,
            true,
            |x| {
                let g = (Jet::constant(1.0) - Jet::var(x) * (1.0 / 3.0))
                    * (Jet::constant(1.0) - Jet::exp(-20.0, x));
                g * g
            },
            |y| {
                let s = Jet::sin(PI, y);
                s * s
            },
        )),
        other => Err(Error::UnknownSolution(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn jet_products_follow_leibniz() {
        // (t^2)(t^3) = t^5
        let t = 0.7;
        let p = Jet::poly(&[0.0, 0.0, 1.0], t) * Jet::poly(&[0.0, 0.0, 0.0, 1.0], t);
        let q = Jet::poly(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0], t);
        for n in 0..5 {
            assert!((p.d(n) - q.d(n)).abs() < 1e-12);
        }
        // sin^2 + cos^2 = 1
        let s = Jet::sin(2.0, t) * Jet::sin(2.0, t) + Jet::cos(2.0, t) * Jet::cos(2.0, t);
        assert!((s.d(0) - 1.0).abs() < 1e-14);
        assert!(s.0[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cascon_sin_peak() {
        let s = manufactured("cascon-sin", None).unwrap();
        assert!((s.value(1.5, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(
            manufactured("nope", None),
            Err(Error::UnknownSolution(_))
        ));
        assert!(manufactured("stommel-vallis", Some(0.0)).is_err());
    }

    #[test]
    fn boundary_values() {
        for id in SOLUTION_IDS {
            let s = manufactured(id, None).unwrap();
            let (lx, ly) = s.domain();
            let mut worst: f64 = 0.0;
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                for (x, y) in [(0.0, t * ly), (lx, t * ly), (t * lx, 0.0), (t * lx, ly)] {
                    worst = worst.max(s.value(x, y).abs());
                }
            }
            if s.is_homogeneous() {
                assert!(worst < 1e-12, "{id}: {worst:e}");
            } else {
                assert!(worst > 1e-12, "{id}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for id in SOLUTION_IDS {
            let s = manufactured(id, None).unwrap();
            let (lx, ly) = s.domain();
            for _ in 0..100 {
                let (x, y) = (
                    rng.gen_range(0.01..0.99) * lx,
                    rng.gen_range(0.01..0.99) * ly,
                );
                let (jx, jy) = s.jets(x, y);
                for n in 1..5 {
                    for (j, t, f) in [(jx, x, &s.x), (jy, y, &s.y)] {
                        let step = 1e-5 * (1.0 + t.abs());
                        let fd = (f(t + step).d(n - 1) - f(t - step).d(n - 1)) / (2.0 * step);
                        let scale = j.d(n).abs().max(j.d(n - 1).abs()).max(1.0);
                        assert!(
                            (fd - j.d(n)).abs() <= 1e-5 * scale,
                            "{id} order {n} at {t}: {fd} vs {}",
                            j.d(n)
                        );
                    }
                }
            }
        }
    }
}
