use crate::error::{Error, Result};
use crate::modem::ChannelSpec;
use crate::quantizer::{
    encode_hires, encode_lowres, mean_abs, sign, BitPlaneStreams, FixedPoint, FrameHeader,
    ModelVector, QuantizerSpec, QuantizerVariant,
};

#[derive(Debug, Clone, PartialEq)]
enum Track {
    Fixed { fp: FixedPoint, steps: Vec<i64> },
    Scaled { values: Vec<f64> },
}

/// Accumulated low-resolution model. Server and agents run this same code,
/// which is what keeps them bit-identical under error-free transport.
#[derive(Debug, Clone, PartialEq)]
pub struct LowResTrack(Track);

impl LowResTrack {
    pub fn new(spec: &QuantizerSpec, n: usize) -> Result<Self> {
        spec.validate()?;
        Ok(Self(match spec.fixed() {
            Some(fp) => Track::Fixed {
                fp,
                steps: vec![0; n],
            },
            None => Track::Scaled {
                values: vec![0.0; n],
            },
        }))
    }

    pub fn len(&self) -> usize {
        match &self.0 {
            Track::Fixed { steps, .. } => steps.len(),
            Track::Scaled { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> ModelVector {
        match &self.0 {
            Track::Fixed { fp, steps } => fp.from_steps(steps),
            Track::Scaled { values } => ModelVector::from_vec_unchecked(values.clone()),
        }
    }

    /// Adds a received differential. For the sign variant `d` is scaled by
    /// the header's alpha.
    pub fn apply(&mut self, d: &ModelVector, header: &FrameHeader) -> Result<()> {
        d.check_len(self.len(), "differential")?;
        match &mut self.0 {
            Track::Fixed { fp, steps } => {
                for (s, k) in steps.iter_mut().zip(fp.to_steps(d)?) {
                    *s += k;
                }
            }
            Track::Scaled { values } => {
                let alpha = header
                    .alpha()
                    .ok_or_else(|| Error::Protocol("sign-variant frame without alpha".into()))?;
                let alpha = f64::from(alpha);
                for (v, s) in values.iter_mut().zip(d.iter()) {
                    *v += alpha * s;
                }
            }
        }
        Ok(())
    }
}

/// What the server puts on the air for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundPayload {
    pub round_index: u64,
    pub header: FrameHeader,
    /// Quantized low-resolution differential.
    pub d: ModelVector,
    /// High-resolution residual; every component is a binary32 value.
    pub w2: ModelVector,
}

impl RoundPayload {
    pub fn encode_streams(&self) -> Result<BitPlaneStreams> {
        let spec = self.header.spec()?;
        Ok(BitPlaneStreams::new(
            self.header,
            encode_lowres(&self.d, &spec)?,
            encode_hires(&self.w2)?,
        ))
    }
}

/// One agent's view of a round after transport.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedPayload {
    pub round_index: u64,
    pub header: FrameHeader,
    pub d: ModelVector,
    /// `None` for receivers that only recover planes 1-2. Values come straight
    /// from the binary32 decoder and may be non-finite after bit errors.
    pub w2: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ServerCodecState {
    track: LowResTrack,
    round_index: u64,
    spec: QuantizerSpec,
}

impl ServerCodecState {
    pub fn new(spec: QuantizerSpec, n: usize) -> Result<Self> {
        Ok(Self {
            track: LowResTrack::new(&spec, n)?,
            round_index: 0,
            spec,
        })
    }

    pub fn tracked_w1(&self) -> ModelVector {
        self.track.values()
    }

    pub fn round_index(&self) -> u64 {
        self.round_index
    }

    pub fn spec(&self) -> &QuantizerSpec {
        &self.spec
    }

    /// Encodes model `w` for the current round and advances the state.
    pub fn encode_round(&mut self, w: &ModelVector) -> Result<RoundPayload> {
        w.check_len(self.track.len(), "server model")?;
        let tracked = self.track.values();
        let diff: Vec<f64> = w.iter().zip(tracked.iter()).map(|(a, b)| a - b).collect();
        let (d, alpha) = match self.spec.variant {
            QuantizerVariant::FixedPoint { .. } => {
                let fp = self.spec.fixed().expect("validated fixed-point spec");
                (fp.from_steps(&fp.to_steps(&diff)?), 0.0)
            }
            QuantizerVariant::SignScale { alpha } => {
                let alpha = alpha.unwrap_or_else(|| mean_abs(&diff)) as f32;
                let d = diff.iter().map(|&x| sign(x)).collect();
                (ModelVector::from_vec_unchecked(d), alpha)
            }
        };
        let header = FrameHeader::new(&self.spec, w.len(), alpha)?;
        self.track.apply(&d, &header)?;
        let tracked = self.track.values();
        let w2 = ModelVector::new(w.iter().zip(tracked.iter()).map(|(a, b)| a - b).collect())?
            .narrowed_f32();
        if let Some(i) = w2.iter().position(|v| !v.is_finite()) {
            return Err(Error::Encoding(format!("residual component {i} overflows binary32")));
        }
        let payload = RoundPayload {
            round_index: self.round_index,
            header,
            d,
            w2,
        };
        self.round_index += 1;
        Ok(payload)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentClass {
    HighSnr,
    LowSnr,
}

#[derive(Debug, Clone)]
pub struct AgentDecoderState {
    pub id: usize,
    pub class: AgentClass,
    /// Downlink channel; only used by physical transport.
    pub channel: Option<ChannelSpec>,
    track: LowResTrack,
    round_index: u64,
}

impl AgentDecoderState {
    pub fn new(
        id: usize,
        class: AgentClass,
        channel: Option<ChannelSpec>,
        spec: &QuantizerSpec,
        n: usize,
    ) -> Result<Self> {
        Ok(Self {
            id,
            class,
            channel,
            track: LowResTrack::new(spec, n)?,
            round_index: 0,
        })
    }

    pub fn tracked_w1(&self) -> ModelVector {
        self.track.values()
    }

    pub fn round_index(&self) -> u64 {
        self.round_index
    }

    fn advance(&mut self, rx: &ReceivedPayload) -> Result<()> {
        if rx.round_index != self.round_index {
            return Err(Error::Protocol(format!(
                "agent {} is at round {} but received round {}",
                self.id, self.round_index, rx.round_index
            )));
        }
        self.track.apply(&rx.d, &rx.header)?;
        self.round_index += 1;
        Ok(())
    }

    /// Applies the differential and returns the tracked low-resolution model.
    pub fn decode_low(&mut self, rx: &ReceivedPayload) -> Result<ModelVector> {
        self.advance(rx)?;
        Ok(self.track.values())
    }

    /// Applies the differential and returns tracked model plus residual.
    /// Non-finite residual words (possible after bit errors on plane 3) are
    /// erased to zero.
    pub fn decode_high(&mut self, rx: &ReceivedPayload) -> Result<ModelVector> {
        if self.class != AgentClass::HighSnr {
            return Err(Error::Protocol(format!(
                "agent {} is low-SNR and cannot decode the residual",
                self.id
            )));
        }
        let w2 = rx
            .w2
            .as_ref()
            .ok_or_else(|| Error::Protocol(format!("agent {}: residual missing", self.id)))?;
        if w2.len() != rx.d.len() {
            return Err(Error::framing("residual and differential lengths differ"));
        }
        self.advance(rx)?;
        let t = self.track.values();
        let model = t
            .iter()
            .zip(w2)
            .map(|(a, &b)| if b.is_finite() { a + b } else { *a })
            .collect();
        Ok(ModelVector::from_vec_unchecked(model))
    }

    /// Working model for this agent's class.
    pub fn decode(&mut self, rx: &ReceivedPayload) -> Result<ModelVector> {
        match self.class {
            AgentClass::HighSnr => self.decode_high(rx),
            AgentClass::LowSnr => self.decode_low(rx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn mv(v: &[f64]) -> ModelVector {
        ModelVector::new(v.to_vec()).unwrap()
    }

    fn ideal(p: &RoundPayload, class: AgentClass) -> ReceivedPayload {
        ReceivedPayload {
            round_index: p.round_index,
            header: p.header,
            d: p.d.clone(),
            w2: (class == AgentClass::HighSnr).then(|| p.w2.to_vec()),
        }
    }

    #[test]
    fn first_rounds_example() {
        let spec = QuantizerSpec::fixed_point(2).unwrap();
        let mut server = ServerCodecState::new(spec, 1).unwrap();
        let p0 = server.encode_round(&mv(&[0.123])).unwrap();
        assert_eq!(p0.d[0], 0.12);
        assert_eq!(server.tracked_w1()[0], 0.12);
        assert_eq!(p0.w2[0], f64::from((0.123f64 - 0.12) as f32));
        let p1 = server.encode_round(&mv(&[0.123])).unwrap();
        assert_eq!(p1.d[0], 0.0);
        assert_eq!(server.tracked_w1()[0], 0.12);
        assert_eq!(p1.w2, p0.w2);
        assert_eq!(server.round_index(), 2);
    }

    #[test]
    fn length_mismatch_is_domain_error() {
        let mut server = ServerCodecState::new(QuantizerSpec::fixed_point(2).unwrap(), 2).unwrap();
        assert!(matches!(server.encode_round(&mv(&[0.1])), Err(Error::Domain(_))));
    }

    #[test]
    fn range_overflow_is_reported() {
        let spec = QuantizerSpec::fixed_point(2).unwrap().with_lowres_int_bits(8).unwrap();
        let mut server = ServerCodecState::new(spec, 1).unwrap();
        assert!(matches!(server.encode_round(&mv(&[5.0])), Err(Error::Range { .. })));
    }

    #[test]
    fn zero_differential_leaves_agent_unchanged() {
        let spec = QuantizerSpec::fixed_point(2).unwrap();
        let mut server = ServerCodecState::new(spec, 2).unwrap();
        let mut agent = AgentDecoderState::new(0, AgentClass::LowSnr, None, &spec, 2).unwrap();
        let w = mv(&[0.5, -0.25]);
        let a = agent.decode_low(&ideal(&server.encode_round(&w).unwrap(), AgentClass::LowSnr)).unwrap();
        let p = server.encode_round(&w).unwrap();
        assert!(p.d.iter().all(|&x| x == 0.0));
        let b = agent.decode_low(&ideal(&p, AgentClass::LowSnr)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn high_decode_with_zero_residual_equals_low() {
        let spec = QuantizerSpec::fixed_point(2).unwrap();
        let mut server = ServerCodecState::new(spec, 2).unwrap();
        let mut hi = AgentDecoderState::new(0, AgentClass::HighSnr, None, &spec, 2).unwrap();
        let mut lo = AgentDecoderState::new(1, AgentClass::LowSnr, None, &spec, 2).unwrap();
        let p = server.encode_round(&mv(&[0.25, -0.5])).unwrap();
        assert!(p.w2.iter().all(|&x| x == 0.0));
        assert_eq!(
            hi.decode_high(&ideal(&p, AgentClass::HighSnr)).unwrap(),
            lo.decode_low(&ideal(&p, AgentClass::LowSnr)).unwrap()
        );
    }

    #[test]
    fn contract_and_sync_violations() {
        let spec = QuantizerSpec::fixed_point(2).unwrap();
        let mut server = ServerCodecState::new(spec, 1).unwrap();
        let mut lo = AgentDecoderState::new(1, AgentClass::LowSnr, None, &spec, 1).unwrap();
        let p0 = server.encode_round(&mv(&[0.1])).unwrap();
        assert!(matches!(lo.decode_high(&ideal(&p0, AgentClass::HighSnr)), Err(Error::Protocol(_))));
        let p1 = server.encode_round(&mv(&[0.2])).unwrap();
        assert!(matches!(lo.decode_low(&ideal(&p1, AgentClass::LowSnr)), Err(Error::Protocol(_))));
        let mut hi = AgentDecoderState::new(0, AgentClass::HighSnr, None, &spec, 1).unwrap();
        assert!(matches!(hi.decode_high(&ideal(&p0, AgentClass::LowSnr)), Err(Error::Protocol(_))));
    }

    #[test]
    fn sign_variant_tracks_with_alpha() {
        let spec = QuantizerSpec::sign_scale(None).unwrap();
        let mut server = ServerCodecState::new(spec, 3).unwrap();
        let mut hi = AgentDecoderState::new(0, AgentClass::HighSnr, None, &spec, 3).unwrap();
        let mut rng = crate::rng::stream(3, &[]);
        for _ in 0..20 {
            let w = ModelVector::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let p = server.encode_round(&w).unwrap();
            assert!(p.header.alpha().is_some());
            let got = hi.decode_high(&ideal(&p, AgentClass::HighSnr)).unwrap();
            assert_eq!(hi.tracked_w1(), server.tracked_w1());
            for n in 0..3 {
                assert!((got[n] - w[n]).abs() <= 2f64.powi(-24) * p.w2[n].abs() + 4.0 * f64::EPSILON);
            }
        }
    }
}
