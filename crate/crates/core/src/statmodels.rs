//! Exact and Gaussian-approximated distributions of the energy-detection
//! statistic `ψ` for each receiver.
//!
//! | symbol | field |
//! |---|---|
//! | σ_DF² (relay), σ_AF², σ_i² (DF destination, per bit) | `LinkStatPair::sigma_sq` |
//! | σ̂_i² (variance of ψ under bit i) | `GaussianModel::variance` |
//! | μ_i | `GaussianModel::mean` |
//! | α, β (per bit) | `LinkStatPair::alpha`, `LinkStatPair::beta` |

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, log_bessel_i, marcum_pq, reg_gamma_pq};
use crate::sysmodel::{ChannelRealization, LinkParams};

/// `|α|² < DEGENERACY_RTOL · σ²` selects the central (gamma) model.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// `ψ ~ Gamma(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaModel {
    pub shape: f64,
    pub scale: f64,
}

/// `ψ = scale · X` with `X ~ χ'²(dof, noncentrality)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcChiSqModel {
    pub dof: u32,
    pub noncentrality: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactModel {
    Gamma(GammaModel),
    NcChiSq(NcChiSqModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    pub mean: f64,
    pub variance: f64,
}

/// Which receiver a pair of models describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// DF first slot, at the relay.
    SourceRelay,
    /// DF second slot, at the destination.
    RelayDest,
    /// AF, at the destination.
    AfEndToEnd,
}

/// Bit-0 / bit-1 models of `ψ` at one receiver, plus the parameters they
/// were built from. Index 0 and 1 of every array refer to the bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStatPair {
    pub link: LinkKind,
    pub n: u32,
    pub exact: [ExactModel; 2],
    pub gauss: [GaussianModel; 2],
    /// Deterministic signal amplitude under each bit.
    pub alpha: [Complex64; 2],
    /// Relay-interference amplitude under each bit (zero at the relay).
    pub beta: [Complex64; 2],
    /// Total noise-plus-interference power under each bit.
    pub sigma_sq: [f64; 2],
}

fn check_x(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(func, format!("x must be >= 0, got {x}")));
    }
    Ok(())
}

impl GammaModel {
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        check_x("GammaModel::log_pdf", x)?;
        let k = self.shape;
        if x == 0.0 {
            return Ok(match k.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
                Some(std::cmp::Ordering::Equal) => -self.scale.ln(),
                _ => f64::INFINITY,
            });
        }
        Ok((k - 1.0) * x.ln() - x / self.scale - ln_gamma(k) - k * self.scale.ln())
    }

    /// `(P(ψ ≤ x), P(ψ > x))`.
    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        check_x("GammaModel::cdf", x)?;
        reg_gamma_pq(self.shape, x / self.scale)
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

impl NcChiSqModel {
    /// The central member of the family as a gamma model.
    fn central(&self) -> GammaModel {
        GammaModel {
            shape: self.dof as f64 / 2.0,
            scale: 2.0 * self.scale,
        }
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        check_x("NcChiSqModel::log_pdf", x)?;
        let lam = self.noncentrality;
        if lam == 0.0 {
            return self.central().log_pdf(x);
        }
        let m = self.dof / 2;
        let mf = m as f64;
        if x == 0.0 {
            return Ok(if m == 1 {
                -std::f64::consts::LN_2 - lam / 2.0 - self.scale.ln()
            } else {
                f64::NEG_INFINITY
            });
        }
        let u = x / self.scale;
        let ln_i = log_bessel_i(m - 1, (lam * u).sqrt())?;
        Ok(-std::f64::consts::LN_2 - (u + lam) / 2.0 + 0.5 * (mf - 1.0) * (u.ln() - lam.ln()) + ln_i
            - self.scale.ln())
    }

    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        check_x("NcChiSqModel::cdf", x)?;
        if self.noncentrality == 0.0 {
            return self.central().cdf_sf(x);
        }
        marcum_pq(self.dof / 2, self.noncentrality.sqrt(), (x / self.scale).sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.scale * (self.dof as f64 + self.noncentrality)
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.scale * self.scale * (self.dof as f64 + 2.0 * self.noncentrality)
    }
}

impl ExactModel {
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        match self {
            ExactModel::Gamma(g) => g.log_pdf(x),
            ExactModel::NcChiSq(c) => c.log_pdf(x),
        }
    }

    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            ExactModel::Gamma(g) => g.cdf_sf(x),
            ExactModel::NcChiSq(c) => c.cdf_sf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.0)
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.1)
    }

    pub fn mean(&self) -> f64 {
        match self {
            ExactModel::Gamma(g) => g.mean(),
            ExactModel::NcChiSq(c) => c.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ExactModel::Gamma(g) => g.variance(),
            ExactModel::NcChiSq(c) => c.variance(),
        }
    }
}

impl GaussianModel {
    pub fn log_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (2.0 * std::f64::consts::PI * self.variance).ln() - d * d / (2.0 * self.variance)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Model of `ψ = (1/N)Σ|α + n|²` with `n ~ CN(0, σ²)`.
fn exact_model(n: u32, alpha_sq: f64, sigma_sq: f64) -> ExactModel {
    if alpha_sq < DEGENERACY_RTOL * sigma_sq {
        ExactModel::Gamma(GammaModel {
            shape: n as f64,
            scale: sigma_sq / n as f64,
        })
    } else {
        let nf = n as f64;
        ExactModel::NcChiSq(NcChiSqModel {
            dof: 2 * n,
            noncentrality: 2.0 * nf * alpha_sq / sigma_sq,
            scale: sigma_sq / (2.0 * nf),
        })
    }
}

fn gaussian_model(n: u32, alpha_sq: f64, sigma_sq: f64) -> GaussianModel {
    GaussianModel {
        mean: alpha_sq + sigma_sq,
        variance: (sigma_sq * sigma_sq + 2.0 * alpha_sq * sigma_sq) / n as f64,
    }
}

fn pair(link: LinkKind, n: u32, alpha: [Complex64; 2], beta: [Complex64; 2], sigma_sq: [f64; 2]) -> LinkStatPair {
    let a2 = [alpha[0].norm_sqr(), alpha[1].norm_sqr()];
    LinkStatPair {
        link,
        n,
        exact: [exact_model(n, a2[0], sigma_sq[0]), exact_model(n, a2[1], sigma_sq[1])],
        gauss: [gaussian_model(n, a2[0], sigma_sq[0]), gaussian_model(n, a2[1], sigma_sq[1])],
        alpha,
        beta,
        sigma_sq,
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relay in the first DF timeslot.
pub fn build_df_relay_models(lp: &LinkParams, ch: &ChannelRealization) -> LinkStatPair {
    let s = lp.sigma_df_sq();
    pair(
        LinkKind::SourceRelay,
        lp.n,
        [ZERO, ch.h_sr * lp.p_s1.sqrt()],
        [ZERO, ZERO],
        [s, s],
    )
}

/// Destination in the second DF timeslot, conditioned on the relay's bit.
pub fn build_df_dest_models(lp: &LinkParams, ch: &ChannelRealization) -> LinkStatPair {
    let r = &lp.reflection;
    let mut alpha = [ZERO; 2];
    let mut beta = [ZERO; 2];
    let mut sigma_sq = [0.0; 2];
    for bit in 0..2 {
        let g = ch.h_rd * r.b(bit as u8) * r.eta;
        alpha[bit] = g * ch.h_sr * lp.p_s2.sqrt();
        beta[bit] = g * lp.p_ir.sqrt();
        sigma_sq[bit] = beta[bit].norm_sqr() + lp.p_id + lp.p_wd;
    }
    pair(LinkKind::RelayDest, lp.n, alpha, beta, sigma_sq)
}

/// Destination under AF.
pub fn build_af_models(lp: &LinkParams, ch: &ChannelRealization) -> LinkStatPair {
    let r = &lp.reflection;
    let g = ch.h_rd * r.b_af * r.eta;
    let beta = g * lp.p_ir.sqrt();
    let s = beta.norm_sqr() + lp.p_id + lp.p_wd;
    pair(
        LinkKind::AfEndToEnd,
        lp.n,
        [ZERO, g * ch.h_sr * lp.p_s.sqrt()],
        [beta, beta],
        [s, s],
    )
}

impl LinkStatPair {
    pub fn mean(&self, bit: usize) -> f64 {
        self.gauss[bit].mean
    }

    /// Bit whose statistic has the larger mean; ties go to bit 1.
    pub fn bit_of_high_energy(&self) -> u8 {
        if self.gauss[1].mean >= self.gauss[0].mean {
            1
        } else {
            0
        }
    }

    /// `ln f_0(x) − ln f_1(x)` of the exact models.
    pub fn log_ratio(&self, x: f64) -> Result<f64> {
        Ok(self.exact[0].log_pdf(x)? - self.exact[1].log_pdf(x)?)
    }
}
