//! System parameters, path loss and the Rician block-fading channel.
//!
//! Powers are configured in dBm and gains in dB; [`SystemParams::resolve`]
//! converts everything once into the linear [`LinkParams`] used by the
//! simulation and analysis code.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::txsim::ReflectionState;

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Generator used for every random stream in the crate.
pub type SimRng = ChaCha8Rng;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Independent substream `stream` of the generator seeded by `master_seed`.
/// ChaCha streams never overlap, so workers can own one each.
pub fn substream(master_seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// One `CN(0, 1)` draw.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    /// source to relay
    SR,
    /// relay to destination
    RD,
}

/// Named choices of the relay reflection coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionPreset {
    /// `Γ0 = A`, `Γ1 = -|A|/A`: bit 0 reflects nothing.
    PerfectOok,
    /// `Γ0 = 1`, `Γ1 = -1`.
    Bistatic,
}

/// Physical and protocol constants. Field units are part of the name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    pub carrier_frequency_hz: f64,
    pub dist_sr_m: f64,
    pub dist_rd_m: f64,
    pub pathloss_exponent: f64,
    pub rician_k: f64,
    pub gain_tx_db: f64,
    pub gain_relay_db: f64,
    /// Destination receive antenna gain.
    pub gain_dest_db: f64,
    /// Multiplies the effective aperture of the relay antenna, i.e. the
    /// power the relay captures from the source.
    pub relay_aperture_scale: f64,
    pub noise_relay_dbm: f64,
    pub noise_dest_dbm: f64,
    pub interference_relay_dbm: f64,
    pub interference_dest_dbm: f64,
    /// Antenna structural mode `A`, as `[re, im]`.
    pub structural_mode: Complex64,
    pub gamma0: Complex64,
    pub gamma1: Complex64,
    /// Backscatter switching loss as a power ratio in dB (non-positive).
    pub switching_loss_db: f64,
    pub samples_per_symbol: u32,
    pub power_budget_dbm: f64,
    /// Source power in the first DF timeslot.
    pub power_slot1_dbm: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let a = Complex64::new(0.6047, 0.5042);
        Self {
            carrier_frequency_hz: 915e6,
            dist_sr_m: 15.0,
            dist_rd_m: 15.0,
            pathloss_exponent: 2.5,
            rician_k: 4.0,
            gain_tx_db: 6.0,
            gain_relay_db: 1.5,
            gain_dest_db: 0.0,
            relay_aperture_scale: 1.0,
            noise_relay_dbm: -110.0,
            noise_dest_dbm: -110.0,
            interference_relay_dbm: -70.0,
            interference_dest_dbm: -90.0,
            structural_mode: a,
            gamma0: a,
            gamma1: -a.norm() / a,
            switching_loss_db: -1.1,
            samples_per_symbol: 25,
            power_budget_dbm: 20.0,
            power_slot1_dbm: 10.0,
        }
    }
}

const UNIT_DISC_SLACK: f64 = 1e-12;

impl SystemParams {
    pub fn with_reflection_preset(mut self, preset: ReflectionPreset) -> Self {
        match preset {
            ReflectionPreset::PerfectOok => {
                let a = self.structural_mode;
                self.gamma0 = a;
                self.gamma1 = -a.norm() / a;
            }
            ReflectionPreset::Bistatic => {
                self.gamma0 = Complex64::new(1.0, 0.0);
                self.gamma1 = Complex64::new(-1.0, 0.0);
            }
        }
        self
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("dist_sr_m", self.dist_sr_m),
            ("dist_rd_m", self.dist_rd_m),
            ("pathloss_exponent", self.pathloss_exponent),
            ("rician_k", self.rician_k),
            ("gain_tx_db", self.gain_tx_db),
            ("gain_relay_db", self.gain_relay_db),
            ("gain_dest_db", self.gain_dest_db),
            ("relay_aperture_scale", self.relay_aperture_scale),
            ("noise_relay_dbm", self.noise_relay_dbm),
            ("noise_dest_dbm", self.noise_dest_dbm),
            ("interference_relay_dbm", self.interference_relay_dbm),
            ("interference_dest_dbm", self.interference_dest_dbm),
            ("switching_loss_db", self.switching_loss_db),
            ("power_budget_dbm", self.power_budget_dbm),
            ("power_slot1_dbm", self.power_slot1_dbm),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be finite, got {v}")));
            }
        }
        let positive = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("dist_sr_m", self.dist_sr_m),
            ("dist_rd_m", self.dist_rd_m),
            ("relay_aperture_scale", self.relay_aperture_scale),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.rician_k < 0.0 {
            return Err(Error::InvalidParam("rician_k must be >= 0".into()));
        }
        for (name, c) in [
            ("structural_mode", self.structural_mode),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
        ] {
            if !(c.re.is_finite() && c.im.is_finite()) || c.norm() > 1.0 + UNIT_DISC_SLACK {
                return Err(Error::InvalidParam(format!("|{name}| must be <= 1, got {c}")));
            }
        }
        if self.samples_per_symbol < 1 {
            return Err(Error::InvalidParam("samples_per_symbol must be >= 1".into()));
        }
        if self.switching_loss_db > 0.0 {
            return Err(Error::InvalidParam(
                "switching_loss_db must be <= 0 (efficiency in (0, 1])".into(),
            ));
        }
        Ok(())
    }

    /// Sets one real-valued field by its configuration name. Complex fields
    /// are addressed as `<name>_re` / `<name>_im`; `samples_per_symbol` must
    /// be a positive integer.
    pub fn set_by_key(&mut self, key: &str, value: f64) -> Result<()> {
        let complex_part = |c: &mut Complex64, im: bool| {
            if im {
                c.im = value
            } else {
                c.re = value
            }
        };
        match key {
            "carrier_frequency_hz" => self.carrier_frequency_hz = value,
            "dist_sr_m" => self.dist_sr_m = value,
            "dist_rd_m" => self.dist_rd_m = value,
            "pathloss_exponent" => self.pathloss_exponent = value,
            "rician_k" => self.rician_k = value,
            "gain_tx_db" => self.gain_tx_db = value,
            "gain_relay_db" => self.gain_relay_db = value,
            "gain_dest_db" => self.gain_dest_db = value,
            "relay_aperture_scale" => self.relay_aperture_scale = value,
            "noise_relay_dbm" => self.noise_relay_dbm = value,
            "noise_dest_dbm" => self.noise_dest_dbm = value,
            "interference_relay_dbm" => self.interference_relay_dbm = value,
            "interference_dest_dbm" => self.interference_dest_dbm = value,
            "switching_loss_db" => self.switching_loss_db = value,
            "power_budget_dbm" => self.power_budget_dbm = value,
            "power_slot1_dbm" => self.power_slot1_dbm = value,
            "samples_per_symbol" => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::InvalidParam(format!(
                        "samples_per_symbol must be a positive integer, got {value}"
                    )));
                }
                self.samples_per_symbol = value as u32;
            }
            "structural_mode_re" => complex_part(&mut self.structural_mode, false),
            "structural_mode_im" => complex_part(&mut self.structural_mode, true),
            "gamma0_re" => complex_part(&mut self.gamma0, false),
            "gamma0_im" => complex_part(&mut self.gamma0, true),
            "gamma1_re" => complex_part(&mut self.gamma1, false),
            "gamma1_im" => complex_part(&mut self.gamma1, true),
            _ => return Err(Error::Config(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    /// Additional constraint of the two-slot scheme: `0 < P_S,1 < P_S`.
    pub fn validate_df(&self) -> Result<()> {
        if self.power_slot1_dbm >= self.power_budget_dbm {
            return Err(Error::InvalidParam(format!(
                "power_slot1_dbm ({}) must be below power_budget_dbm ({})",
                self.power_slot1_dbm, self.power_budget_dbm
            )));
        }
        Ok(())
    }

    /// Linear power gain `G_t G_r (c/f_c)² / (d^γ (4π)²)` of one hop.
    pub fn path_loss(&self, link: Link) -> Result<f64> {
        let (d, gain_db) = match link {
            Link::SR => (self.dist_sr_m, self.gain_tx_db + self.gain_relay_db),
            Link::RD => (self.dist_rd_m, self.gain_relay_db + self.gain_dest_db),
        };
        if !(d > 0.0) {
            return Err(Error::domain("path_loss", format!("distance must be > 0, got {d}")));
        }
        if !(self.carrier_frequency_hz > 0.0) {
            return Err(Error::domain("path_loss", "carrier frequency must be > 0"));
        }
        let aperture = match link {
            Link::SR => self.relay_aperture_scale,
            Link::RD => 1.0,
        };
        let wavelength = SPEED_OF_LIGHT / self.carrier_frequency_hz;
        let four_pi = 4.0 * std::f64::consts::PI;
        Ok(db_to_linear(gain_db) * aperture * wavelength * wavelength
            / (d.powf(self.pathloss_exponent) * four_pi * four_pi))
    }

    /// Amplitude efficiency `η` of the backscatter modulator.
    pub fn eta(&self) -> f64 {
        10f64.powf(self.switching_loss_db / 20.0)
    }

    pub fn reflection_state(&self) -> ReflectionState {
        ReflectionState::new(self.structural_mode, self.gamma0, self.gamma1, self.eta())
    }

    /// Validates and converts to linear units.
    pub fn resolve(&self) -> Result<LinkParams> {
        self.validate()?;
        let p_s = dbm_to_watts(self.power_budget_dbm);
        let p_s1 = dbm_to_watts(self.power_slot1_dbm).min(p_s);
        Ok(LinkParams {
            n: self.samples_per_symbol,
            p_s,
            p_s1,
            p_s2: p_s - p_s1,
            p_ir: dbm_to_watts(self.interference_relay_dbm),
            p_id: dbm_to_watts(self.interference_dest_dbm),
            p_wr: dbm_to_watts(self.noise_relay_dbm),
            p_wd: dbm_to_watts(self.noise_dest_dbm),
            reflection: self.reflection_state(),
            l_sr: self.path_loss(Link::SR)?,
            l_rd: self.path_loss(Link::RD)?,
            rician_k: self.rician_k,
        })
    }
}

/// Linear-unit view of [`SystemParams`]; all powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub n: u32,
    pub p_s: f64,
    pub p_s1: f64,
    pub p_s2: f64,
    pub p_ir: f64,
    pub p_id: f64,
    pub p_wr: f64,
    pub p_wd: f64,
    pub reflection: ReflectionState,
    pub l_sr: f64,
    pub l_rd: f64,
    pub rician_k: f64,
}

impl LinkParams {
    /// Same parameters with the DF split `P_S,1 = p_s1`, `P_S,2 = P_S - p_s1`.
    pub fn with_slot1_power(mut self, p_s1: f64) -> Self {
        self.p_s1 = p_s1;
        self.p_s2 = self.p_s - p_s1;
        self
    }

    /// Every power (signal, interference, noise) multiplied by `c`.
    pub fn scaled_powers(mut self, c: f64) -> Self {
        self.p_s *= c;
        self.p_s1 *= c;
        self.p_s2 *= c;
        self.p_ir *= c;
        self.p_id *= c;
        self.p_wr *= c;
        self.p_wd *= c;
        self
    }

    pub fn sigma_df_sq(&self) -> f64 {
        self.p_ir + self.p_wr
    }
}

/// One coherence-period draw of the two hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h_sr: Complex64,
    pub h_rd: Complex64,
    pub seed_tag: u64,
}

impl ChannelRealization {
    /// Unit small-scale gains: `h = √l` on both hops.
    pub fn unit(lp: &LinkParams) -> Self {
        Self {
            h_sr: Complex64::new(lp.l_sr.sqrt(), 0.0),
            h_rd: Complex64::new(lp.l_rd.sqrt(), 0.0),
            seed_tag: 0,
        }
    }
}

/// Small-scale Rician coefficient `h' ~ CN(√(K/(K+1)), 1/(K+1))`.
pub fn rician_small_scale<R: Rng + ?Sized>(k: f64, rng: &mut R) -> Complex64 {
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (k + 1.0)).sqrt();
    Complex64::new(los, 0.0) + complex_normal(rng) * scatter
}

/// Draws both hops independently, `h = √l · h'`.
pub fn draw_channel<R: Rng + ?Sized>(lp: &LinkParams, seed_tag: u64, rng: &mut R) -> ChannelRealization {
    let h_sr = rician_small_scale(lp.rician_k, rng) * lp.l_sr.sqrt();
    let h_rd = rician_small_scale(lp.rician_k, rng) * lp.l_rd.sqrt();
    ChannelRealization { h_sr, h_rd, seed_tag }
}
