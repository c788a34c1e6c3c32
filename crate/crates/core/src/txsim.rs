//! Baseband sample synthesis for both relaying schemes and the
//! energy-detection test statistic. This is the physical Monte Carlo
//! reference the analytic models are checked against.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sysmodel::{complex_normal, ChannelRealization, LinkParams};

/// Relay baseband amplitudes `B = A - Γ` and the modulator efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionState {
    pub b0: Complex64,
    pub b1: Complex64,
    /// Amplitude used by AF: the larger of `b0`, `b1` in magnitude.
    pub b_af: Complex64,
    /// Amplitude efficiency, in (0, 1].
    pub eta: f64,
}

impl ReflectionState {
    pub fn new(a: Complex64, gamma0: Complex64, gamma1: Complex64, eta: f64) -> Self {
        let b0 = a - gamma0;
        let b1 = a - gamma1;
        let b_af = if b0.norm() > b1.norm() { b0 } else { b1 };
        Self { b0, b1, b_af, eta }
    }

    pub fn b(&self, bit: u8) -> Complex64 {
        if bit == 0 {
            self.b0
        } else {
            self.b1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameScheme {
    DfSlot1,
    DfSlot2,
    Af,
}

impl FrameScheme {
    fn tag(self) -> u8 {
        match self {
            FrameScheme::DfSlot1 => 1,
            FrameScheme::DfSlot2 => 2,
            FrameScheme::Af => 3,
        }
    }

    fn from_tag(t: u8) -> Result<Self> {
        match t {
            1 => Ok(FrameScheme::DfSlot1),
            2 => Ok(FrameScheme::DfSlot2),
            3 => Ok(FrameScheme::Af),
            _ => Err(Error::FrameFormat(format!("unknown scheme tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Receiver {
    Relay,
    Destination,
}

/// One receiver's samples over one data symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub samples: Vec<Complex64>,
    pub scheme: FrameScheme,
    /// Bit that selected the signal: the source bit, or the relay's
    /// forwarded bit in the second DF slot.
    pub true_bit: u8,
}

impl SymbolFrame {
    pub fn receiver(&self) -> Receiver {
        match self.scheme {
            FrameScheme::DfSlot1 => Receiver::Relay,
            FrameScheme::DfSlot2 | FrameScheme::Af => Receiver::Destination,
        }
    }
}

/// Average power of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStatistic {
    pub value: f64,
    pub receiver: Receiver,
}

/// Per-sample generator for the relay in DF slot 1:
/// `y = √P_S,1 h_SR x + √P_I,R z + w`.
#[derive(Debug, Clone, Copy)]
struct DfRelayGen {
    signal: Complex64,
    interference_amp: f64,
    noise_amp: f64,
}

impl DfRelayGen {
    fn new(lp: &LinkParams, ch: &ChannelRealization, bit: u8) -> Self {
        let signal = if bit == 1 {
            ch.h_sr * lp.p_s1.sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        };
        Self {
            signal,
            interference_amp: lp.p_ir.sqrt(),
            noise_amp: lp.p_wr.sqrt(),
        }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let z = complex_normal(rng);
        let w = complex_normal(rng);
        self.signal + z * self.interference_amp + w * self.noise_amp
    }
}

/// Per-sample generator for the destination, shared by DF slot 2 and AF:
/// `y = α + β z_R + √P_I,D z_D + w_D`.
#[derive(Debug, Clone, Copy)]
struct DestGen {
    alpha: Complex64,
    beta: Complex64,
    interference_amp: f64,
    noise_amp: f64,
}

impl DestGen {
    fn df(lp: &LinkParams, ch: &ChannelRealization, relay_bit: u8) -> Self {
        let r = &lp.reflection;
        let gain = ch.h_rd * r.b(relay_bit) * r.eta;
        Self {
            alpha: gain * ch.h_sr * lp.p_s2.sqrt(),
            beta: gain * lp.p_ir.sqrt(),
            interference_amp: lp.p_id.sqrt(),
            noise_amp: lp.p_wd.sqrt(),
        }
    }

    fn af(lp: &LinkParams, ch: &ChannelRealization, bit: u8) -> Self {
        let r = &lp.reflection;
        let gain = ch.h_rd * r.b_af * r.eta;
        let alpha = if bit == 1 {
            gain * ch.h_sr * lp.p_s.sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        };
        Self {
            alpha,
            beta: gain * lp.p_ir.sqrt(),
            interference_amp: lp.p_id.sqrt(),
            noise_amp: lp.p_wd.sqrt(),
        }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let z_r = complex_normal(rng);
        let z_d = complex_normal(rng);
        let w = complex_normal(rng);
        self.alpha + self.beta * z_r + z_d * self.interference_amp + w * self.noise_amp
    }
}

fn check_bit(bit: u8) {
    assert!(bit <= 1, "bit must be 0 or 1, got {bit}");
}

/// Relay samples in the first DF timeslot.
pub fn synth_df_relay_rx<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    bit: u8,
    rng: &mut R,
) -> SymbolFrame {
    check_bit(bit);
    let g = DfRelayGen::new(lp, ch, bit);
    SymbolFrame {
        samples: (0..lp.n).map(|_| g.sample(rng)).collect(),
        scheme: FrameScheme::DfSlot1,
        true_bit: bit,
    }
}

/// Destination samples in the second DF timeslot; `relay_bit` selects `B`.
pub fn synth_df_dest_rx<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    relay_bit: u8,
    rng: &mut R,
) -> SymbolFrame {
    check_bit(relay_bit);
    let g = DestGen::df(lp, ch, relay_bit);
    SymbolFrame {
        samples: (0..lp.n).map(|_| g.sample(rng)).collect(),
        scheme: FrameScheme::DfSlot2,
        true_bit: relay_bit,
    }
}

/// Destination samples under AF. The relay adds no thermal noise.
pub fn synth_af_dest_rx<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    bit: u8,
    rng: &mut R,
) -> SymbolFrame {
    check_bit(bit);
    let g = DestGen::af(lp, ch, bit);
    SymbolFrame {
        samples: (0..lp.n).map(|_| g.sample(rng)).collect(),
        scheme: FrameScheme::Af,
        true_bit: bit,
    }
}

/// `ψ = (1/N) Σ |y[n]|²`.
pub fn test_statistic(frame: &SymbolFrame) -> Result<TestStatistic> {
    if frame.samples.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let sum: f64 = frame.samples.iter().map(|y| y.norm_sqr()).sum();
    Ok(TestStatistic {
        value: sum / frame.samples.len() as f64,
        receiver: frame.receiver(),
    })
}

// Allocation-free variants used by the Monte Carlo runners. They consume the
// generator exactly like the frame builders above.

pub fn df_relay_psi<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    bit: u8,
    rng: &mut R,
) -> f64 {
    let g = DfRelayGen::new(lp, ch, bit);
    (0..lp.n).map(|_| g.sample(rng).norm_sqr()).sum::<f64>() / lp.n as f64
}

pub fn df_dest_psi<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    relay_bit: u8,
    rng: &mut R,
) -> f64 {
    let g = DestGen::df(lp, ch, relay_bit);
    (0..lp.n).map(|_| g.sample(rng).norm_sqr()).sum::<f64>() / lp.n as f64
}

pub fn af_dest_psi<R: Rng + ?Sized>(
    lp: &LinkParams,
    ch: &ChannelRealization,
    bit: u8,
    rng: &mut R,
) -> f64 {
    let g = DestGen::af(lp, ch, bit);
    (0..lp.n).map(|_| g.sample(rng).norm_sqr()).sum::<f64>() / lp.n as f64
}

/// Frame dump file: `b"BSRF"`, version `u16`, scheme tag `u8`, `N` as `u32`,
/// seed `u64`, frame count `u64`, then per frame one bit byte followed by `N`
/// interleaved `(re, im)` `f64` pairs. Everything little-endian.
pub const FRAME_DUMP_MAGIC: &[u8; 4] = b"BSRF";
pub const FRAME_DUMP_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDump {
    pub scheme: FrameScheme,
    pub samples_per_symbol: u32,
    pub seed: u64,
    pub frames: Vec<SymbolFrame>,
}

pub fn write_frame_dump<W: Write>(mut w: W, dump: &FrameDump) -> Result<()> {
    w.write_all(FRAME_DUMP_MAGIC)?;
    w.write_all(&FRAME_DUMP_VERSION.to_le_bytes())?;
    w.write_all(&[dump.scheme.tag()])?;
    w.write_all(&dump.samples_per_symbol.to_le_bytes())?;
    w.write_all(&dump.seed.to_le_bytes())?;
    w.write_all(&(dump.frames.len() as u64).to_le_bytes())?;
    for f in &dump.frames {
        if f.samples.len() != dump.samples_per_symbol as usize || f.scheme != dump.scheme {
            return Err(Error::FrameFormat("frame does not match dump header".into()));
        }
        w.write_all(&[f.true_bit])?;
        for s in &f.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_frame_dump<R: Read>(mut r: R) -> Result<FrameDump> {
    fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        r.read_exact(&mut b)
            .map_err(|e| Error::FrameFormat(format!("truncated dump: {e}")))?;
        Ok(b)
    }
    if &take::<4, _>(&mut r)? != FRAME_DUMP_MAGIC {
        return Err(Error::FrameFormat("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(&mut r)?);
    if version != FRAME_DUMP_VERSION {
        return Err(Error::FrameFormat(format!("unsupported version {version}")));
    }
    let scheme = FrameScheme::from_tag(take::<1, _>(&mut r)?[0])?;
    let n = u32::from_le_bytes(take(&mut r)?);
    let seed = u64::from_le_bytes(take(&mut r)?);
    let count = u64::from_le_bytes(take(&mut r)?);
    let mut frames = Vec::new();
    for _ in 0..count {
        let bit = take::<1, _>(&mut r)?[0];
        let mut samples = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let re = f64::from_le_bytes(take(&mut r)?);
            let im = f64::from_le_bytes(take(&mut r)?);
            samples.push(Complex64::new(re, im));
        }
        frames.push(SymbolFrame {
            samples,
            scheme,
            true_bit: bit,
        });
    }
    Ok(FrameDump {
        scheme,
        samples_per_symbol: n,
        seed,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::{substream, SystemParams};

    fn quiet_params() -> LinkParams {
        let mut lp = SystemParams::default().resolve().unwrap();
        lp.p_ir = 0.0;
        lp.p_wr = 0.0;
        lp.p_id = 0.0;
        lp.p_wd = 0.0;
        lp
    }

    fn unit_channel() -> ChannelRealization {
        ChannelRealization {
            h_sr: Complex64::new(1.0, 0.0),
            h_rd: Complex64::new(1.0, 0.0),
            seed_tag: 0,
        }
    }

    #[test]
    fn deterministic_relay_limit() {
        let lp = quiet_params().with_slot1_power(1.0);
        let lp = LinkParams { p_s: 2.0, p_s2: 1.0, ..lp };
        let f = synth_df_relay_rx(&lp, &unit_channel(), 1, &mut substream(0, 0));
        assert_eq!(f.samples.len(), 25);
        assert!(f.samples.iter().all(|s| *s == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn deterministic_dest_limits() {
        let mut lp = quiet_params();
        lp.p_s = 2.0;
        lp.p_s1 = 1.0;
        lp.p_s2 = 1.0;
        let r = lp.reflection;
        let f = synth_df_dest_rx(&lp, &unit_channel(), 1, &mut substream(0, 0));
        let expect = r.b1 * r.eta * lp.p_s2.sqrt();
        assert!(f.samples.iter().all(|s| (s - expect).norm() < 1e-15));

        let f = synth_af_dest_rx(&lp, &unit_channel(), 1, &mut substream(0, 0));
        let expect = r.b_af * r.eta * lp.p_s.sqrt();
        assert!(f.samples.iter().all(|s| (s - expect).norm() < 1e-15));
    }

    #[test]
    fn statistic_examples() {
        let f = SymbolFrame {
            samples: vec![Complex64::new(1.0, 0.0); 25],
            scheme: FrameScheme::Af,
            true_bit: 1,
        };
        assert_eq!(test_statistic(&f).unwrap().value, 1.0);
        let f = SymbolFrame {
            samples: vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
            scheme: FrameScheme::DfSlot1,
            true_bit: 0,
        };
        let t = test_statistic(&f).unwrap();
        assert_eq!(t.value, 2.0);
        assert_eq!(t.receiver, Receiver::Relay);
        let empty = SymbolFrame {
            samples: vec![],
            scheme: FrameScheme::Af,
            true_bit: 0,
        };
        assert!(matches!(test_statistic(&empty), Err(Error::EmptyFrame)));
    }

    #[test]
    fn fast_path_matches_frames() {
        let lp = SystemParams::default().resolve().unwrap();
        let ch = ChannelRealization::unit(&lp);
        for bit in 0..2u8 {
            let f = synth_df_relay_rx(&lp, &ch, bit, &mut substream(5, 1));
            let psi = df_relay_psi(&lp, &ch, bit, &mut substream(5, 1));
            assert!((test_statistic(&f).unwrap().value - psi).abs() <= 1e-12 * psi);
            let f = synth_df_dest_rx(&lp, &ch, bit, &mut substream(5, 2));
            let psi = df_dest_psi(&lp, &ch, bit, &mut substream(5, 2));
            assert!((test_statistic(&f).unwrap().value - psi).abs() <= 1e-12 * psi);
            let f = synth_af_dest_rx(&lp, &ch, bit, &mut substream(5, 3));
            let psi = af_dest_psi(&lp, &ch, bit, &mut substream(5, 3));
            assert!((test_statistic(&f).unwrap().value - psi).abs() <= 1e-12 * psi);
        }
    }

    #[test]
    fn af_selects_larger_amplitude() {
        let a = Complex64::new(0.6047, 0.5042);
        let r = ReflectionState::new(a, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), 0.9);
        assert_eq!(r.b_af.norm(), r.b0.norm().max(r.b1.norm()));
        assert_eq!(r.b_af, r.b1);
    }

    #[test]
    fn frame_dump_rejects_garbage() {
        assert!(read_frame_dump(&b"NOPE"[..]).is_err());
        let mut buf = Vec::new();
        buf.extend_from_slice(FRAME_DUMP_MAGIC);
        buf.extend_from_slice(&9u16.to_le_bytes());
        assert!(matches!(read_frame_dump(&buf[..]), Err(Error::FrameFormat(_))));
    }
}
