//! Reference spectral distributions: the semicircle law and the
//! Kesten–McKay law rescaled to unit variance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `k` with `catalan(k)` in a `u64`.
pub const CATALAN_CAP: u32 = 30;

/// `binom(2k, k) / (k + 1)`.
pub fn catalan(k: u32) -> Result<u64> {
    if k > CATALAN_CAP {
        return Err(Error::CatalanOverflow { k });
    }
    // C_{i+1} = C_i * 2(2i + 1) / (i + 2); the division is exact.
    let mut c: u128 = 1;
    for i in 0..u128::from(k) {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    Ok(c as u64)
}

/// 0 for odd `k`, `catalan(k/2)` for even `k`.
pub fn semicircle_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        catalan(k / 2).map(|c| c as f64).unwrap_or_else(|_| {
            // Beyond the integer cap: the ratio recurrence in floating point.
            (0..k / 2).fold(1.0, |c, i| c * 2.0 * f64::from(2 * i + 1) / f64::from(i + 2))
        })
    }
}

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Kesten–McKay density for degree `d`, rescaled by `1/sqrt(d)` so the
/// second moment is 1. This is the law of `A / sqrt(d)` for a random
/// `d`-regular graph, which is `M` without the rank-1 subtraction. The
/// support is `|x| <= 2 sqrt(d - 1) / sqrt(d)`.
pub fn kesten_mckay_density(x: f64, d: u32) -> Result<f64> {
    Ok(ReferenceDistribution::kesten_mckay(d)?.density(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDistribution {
    Semicircle,
    #[serde(rename = "kesten_mckay")]
    KestenMcKay { d: u32 },
}

impl ReferenceDistribution {
    pub fn kesten_mckay(d: u32) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter(format!("Kesten-McKay needs d >= 3, got {d}")));
        }
        Ok(Self::KestenMcKay { d })
    }

    /// Half-width of the (symmetric) support.
    pub fn radius(&self) -> f64 {
        match *self {
            Self::Semicircle => 2.0,
            Self::KestenMcKay { d } => 2.0 * (f64::from(d - 1) / f64::from(d)).sqrt(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let r = self.radius();
        (-r, r)
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Semicircle => semicircle_density(x),
            Self::KestenMcKay { d } => {
                let r = self.radius();
                if x.abs() >= r {
                    return 0.0;
                }
                let d = f64::from(d);
                d * (r * r - x * x).sqrt() / (2.0 * PI * (d - x * x))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Semicircle => semicircle_cdf(x),
            Self::KestenMcKay { d } => {
                let r = self.radius();
                if x <= -r {
                    return 0.0;
                }
                if x >= r {
                    return 1.0;
                }
                // With x = r sin(t) the density integrates in closed form:
                // F = 1/2 + d/(2 pi) [t - q atan(q tan t)],  q = (d - 2)/d.
                let d = f64::from(d);
                let t = (x / r).asin();
                let q = (d - 2.0) / d;
                (0.5 + d / (2.0 * PI) * (t - q * (q * t.tan()).atan())).clamp(0.0, 1.0)
            }
        }
    }

    /// `int_{-inf}^{x} t f(t) dt`.
    pub fn partial_first_moment(&self, x: f64) -> f64 {
        let r = self.radius();
        let x = x.clamp(-r, r);
        match *self {
            Self::Semicircle => -(4.0 - x * x).powf(1.5) / (6.0 * PI),
            Self::KestenMcKay { d } => {
                let d = f64::from(d);
                let w = (1.0 - (x / r) * (x / r)).max(0.0).sqrt();
                let s = r * d.sqrt() / (d - 2.0);
                -(d * r / (2.0 * PI)) * (w - (s * w).atan() / s)
            }
        }
    }

    /// Exact `k`-th moment.
    pub fn moment(&self, k: u32) -> f64 {
        match *self {
            Self::Semicircle => semicircle_moment(k),
            Self::KestenMcKay { d } => {
                if k % 2 == 1 {
                    return 0.0;
                }
                // Closed walks of length k at the root of the infinite
                // d-regular tree, tracked by distance from the root.
                let d = f64::from(d);
                let k = k as usize;
                let mut walks = vec![0.0f64; k + 2];
                walks[0] = 1.0;
                for _ in 0..k {
                    let mut next = vec![0.0f64; k + 2];
                    for (dist, &w) in walks.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        if dist == 0 {
                            next[1] += d * w;
                        } else {
                            next[dist - 1] += w;
                            if dist + 1 < next.len() {
                                next[dist + 1] += (d - 1.0) * w;
                            }
                        }
                    }
                    walks = next;
                }
                walks[0] / d.powi(k as i32 / 2)
            }
        }
    }

    /// Inverse cdf by bisection; `p` is clamped to `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
