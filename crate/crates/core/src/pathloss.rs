//! Large-scale fading model families and their deterministic evaluation.
//!
//! Every family is log-distance with a fixed 10 m reference:
//!
//! * single slope (`ss`): `L + 10 γ lg(d / 10)`
//! * per link class (`per_class`): one single-slope fit per LOS / OLOS / NLOS
//! * double slope (`dsss`, `dsds`): slope `γ1` up to the breakpoint and `γ2`
//!   beyond it, continuous at the breakpoint. `dsss` shares one shadowing
//!   deviation, `dsds` has one per segment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference distance of every model family, in meters.
pub const REFERENCE_DISTANCE_M: f64 = 10.0;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkClass {
    Los,
    Olos,
    Nlos,
    Unknown,
}

impl LinkClass {
    pub const LABELLED: [LinkClass; 3] = [LinkClass::Los, LinkClass::Olos, LinkClass::Nlos];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::Los => "LOS",
            LinkClass::Olos => "OLOS",
            LinkClass::Nlos => "NLOS",
            LinkClass::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "LOS" => Ok(LinkClass::Los),
            "OLOS" => Ok(LinkClass::Olos),
            "NLOS" => Ok(LinkClass::Nlos),
            "UNKNOWN" => Ok(LinkClass::Unknown),
            other => Err(Error::domain(format!("unknown link class {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSlopeParams {
    /// Path loss at the 10 m reference distance, dB.
    pub l_ref: f64,
    pub gamma: f64,
    /// Shadowing standard deviation, dB.
    pub sigma: f64,
}

impl SingleSlopeParams {
    pub fn validate(&self) -> Result<()> {
        if !self.l_ref.is_finite() || !self.gamma.is_finite() {
            return Err(Error::domain("l_ref and gamma must be finite"));
        }
        check_sigma(self.sigma)
    }

    fn mean(&self, d: f64) -> f64 {
        self.l_ref + 10.0 * self.gamma * (d / REFERENCE_DISTANCE_M).log10()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerLinkClassParams {
    pub los: SingleSlopeParams,
    pub olos: SingleSlopeParams,
    pub nlos: SingleSlopeParams,
}

impl PerLinkClassParams {
    pub fn validate(&self) -> Result<()> {
        self.los.validate()?;
        self.olos.validate()?;
        self.nlos.validate()
    }

    pub fn class(&self, link: LinkClass) -> Result<&SingleSlopeParams> {
        match link {
            LinkClass::Los => Ok(&self.los),
            LinkClass::Olos => Ok(&self.olos),
            LinkClass::Nlos => Ok(&self.nlos),
            LinkClass::Unknown => Err(Error::LinkClassRequired),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleSlopeParams {
    pub l_ref: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Breakpoint distance, meters.
    pub d_break: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// `true` for the single-shadowing variant, where `sigma1 == sigma2`.
    #[serde(default)]
    pub shared_sigma: bool,
}

impl DoubleSlopeParams {
    pub fn validate(&self) -> Result<()> {
        if !self.l_ref.is_finite() || !self.gamma1.is_finite() || !self.gamma2.is_finite() {
            return Err(Error::domain("l_ref and exponents must be finite"));
        }
        if !(self.d_break > 0.0 && self.d_break.is_finite()) {
            return Err(Error::domain(format!("d_break must be > 0, got {}", self.d_break)));
        }
        check_sigma(self.sigma1)?;
        check_sigma(self.sigma2)?;
        if self.shared_sigma && self.sigma1 != self.sigma2 {
            return Err(Error::domain("shared_sigma requires sigma1 == sigma2"));
        }
        Ok(())
    }

    /// Path loss at the breakpoint.
    pub fn l_break(&self) -> f64 {
        self.l_ref + 10.0 * self.gamma1 * (self.d_break / REFERENCE_DISTANCE_M).log10()
    }

    fn mean(&self, d: f64) -> f64 {
        if d < self.d_break {
            self.l_ref + 10.0 * self.gamma1 * (d / REFERENCE_DISTANCE_M).log10()
        } else {
            self.l_break() + 10.0 * self.gamma2 * (d / self.d_break).log10()
        }
    }

    fn sigma(&self, d: f64) -> f64 {
        if d < self.d_break {
            self.sigma1
        } else {
            self.sigma2
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("shadowing sigma must be > 0, got {sigma}")))
    }
}

/// Selector for one of the four model families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ss,
    PerClass,
    Dsss,
    Dsds,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Ss, Family::PerClass, Family::Dsss, Family::Dsds];

    /// Number of maximum-likelihood free parameters. The breakpoint of the
    /// double-slope families is a swept hyperparameter and is not counted.
    pub fn parameter_count(self) -> usize {
        match self {
            Family::Ss => 3,
            Family::PerClass => 9,
            Family::Dsss => 4,
            Family::Dsds => 5,
        }
    }

    pub fn is_double_slope(self) -> bool {
        matches!(self, Family::Dsss | Family::Dsds)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ss => "ss",
            Family::PerClass => "per_class",
            Family::Dsss => "dsss",
            Family::Dsds => "dsds",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ss" => Ok(Family::Ss),
            "per_class" => Ok(Family::PerClass),
            "dsss" => Ok(Family::Dsss),
            "dsds" => Ok(Family::Dsds),
            other => Err(Error::domain(format!("unknown model family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub enum PathLossModel {
    SingleSlope(SingleSlopeParams),
    PerClass(PerLinkClassParams),
    DoubleSlope(DoubleSlopeParams),
}

impl PathLossModel {
    pub fn family(&self) -> Family {
        match self {
            PathLossModel::SingleSlope(_) => Family::Ss,
            PathLossModel::PerClass(_) => Family::PerClass,
            PathLossModel::DoubleSlope(p) if p.shared_sigma => Family::Dsss,
            PathLossModel::DoubleSlope(_) => Family::Dsds,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.family().parameter_count()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PathLossModel::SingleSlope(p) => p.validate(),
            PathLossModel::PerClass(p) => p.validate(),
            PathLossModel::DoubleSlope(p) => p.validate(),
        }
    }

    pub fn requires_link_class(&self) -> bool {
        matches!(self, PathLossModel::PerClass(_))
    }

    pub fn d_break(&self) -> Option<f64> {
        match self {
            PathLossModel::DoubleSlope(p) => Some(p.d_break),
            _ => None,
        }
    }

    /// Deterministic (shadowing-free) path loss in dB at distance `d` meters.
    pub fn mean_path_loss(&self, d: f64, link: LinkClass) -> Result<f64> {
        check_distance(d)?;
        Ok(match self {
            PathLossModel::SingleSlope(p) => p.mean(d),
            PathLossModel::PerClass(p) => p.class(link)?.mean(d),
            PathLossModel::DoubleSlope(p) => p.mean(d),
        })
    }

    /// Shadowing standard deviation in dB that applies at `(d, link)`.
    pub fn shadowing_sigma(&self, d: f64, link: LinkClass) -> Result<f64> {
        check_distance(d)?;
        Ok(match self {
            PathLossModel::SingleSlope(p) => p.sigma,
            PathLossModel::PerClass(p) => p.class(link)?.sigma,
            PathLossModel::DoubleSlope(p) => p.sigma(d),
        })
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("distance must be > 0 m, got {d}")))
    }
}

/// Distance at which the first Fresnel zone touches the ground: `4 h_tx h_rx / λ`.
pub fn theoretical_breakpoint(h_tx: f64, h_rx: f64, carrier_hz: f64) -> Result<f64> {
    for (name, v) in [("h_tx", h_tx), ("h_rx", h_rx), ("carrier_hz", carrier_hz)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    Ok(4.0 * h_tx * h_rx / wavelength)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ModelRepr {
    Ss(SingleSlopeParams),
    PerClass(PerLinkClassParams),
    Dsss(DoubleSlopeParams),
    Dsds(DoubleSlopeParams),
}

impl From<PathLossModel> for ModelRepr {
    fn from(m: PathLossModel) -> Self {
        match m {
            PathLossModel::SingleSlope(p) => ModelRepr::Ss(p),
            PathLossModel::PerClass(p) => ModelRepr::PerClass(p),
            PathLossModel::DoubleSlope(p) if p.shared_sigma => ModelRepr::Dsss(p),
            PathLossModel::DoubleSlope(p) => ModelRepr::Dsds(p),
        }
    }
}

impl TryFrom<ModelRepr> for PathLossModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let model = match r {
            ModelRepr::Ss(p) => PathLossModel::SingleSlope(p),
            ModelRepr::PerClass(p) => PathLossModel::PerClass(p),
            ModelRepr::Dsss(p) => PathLossModel::DoubleSlope(DoubleSlopeParams { shared_sigma: true, ..p }),
            ModelRepr::Dsds(p) => PathLossModel::DoubleSlope(DoubleSlopeParams { shared_sigma: false, ..p }),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Parameter sets estimated from the first measurement campaign.
pub mod reference {
    use super::*;

    pub fn single_slope() -> PathLossModel {
        PathLossModel::SingleSlope(SingleSlopeParams { l_ref: 57.34, gamma: 2.69, sigma: 4.5 })
    }

    pub fn per_class() -> PathLossModel {
        PathLossModel::PerClass(PerLinkClassParams {
            los: SingleSlopeParams { l_ref: 58.6, gamma: 2.19, sigma: 3.3 },
            olos: SingleSlopeParams { l_ref: 56.2, gamma: 2.6, sigma: 3.7 },
            nlos: SingleSlopeParams { l_ref: 55.3, gamma: 2.91, sigma: 4.9 },
        })
    }

    pub fn dsss() -> PathLossModel {
        PathLossModel::DoubleSlope(DoubleSlopeParams {
            l_ref: 59.7,
            gamma1: 1.65,
            gamma2: 3.19,
            d_break: 40.0,
            sigma1: 3.85,
            sigma2: 3.85,
            shared_sigma: true,
        })
    }

    pub fn dsds() -> PathLossModel {
        PathLossModel::DoubleSlope(DoubleSlopeParams {
            l_ref: 59.8,
            gamma1: 1.6,
            gamma2: 3.14,
            d_break: 35.0,
            sigma1: 2.2,
            sigma2: 4.5,
            shared_sigma: false,
        })
    }

    /// DSDS parameters of the second (night-time) campaign, 35 m breakpoint.
    pub fn dsds_night() -> PathLossModel {
        PathLossModel::DoubleSlope(DoubleSlopeParams {
            l_ref: 59.5,
            gamma1: 1.55,
            gamma2: 3.28,
            d_break: 35.0,
            sigma1: 2.2,
            sigma2: 4.8,
            shared_sigma: false,
        })
    }

    /// Censoring level of the first campaign, dB.
    pub const CENSOR_LEVEL_DAY: f64 = 110.6;
    /// Censoring level of the second campaign, dB.
    pub const CENSOR_LEVEL_NIGHT: f64 = 123.5;
}
