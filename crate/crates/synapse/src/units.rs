//! Physical quantities with mandatory unit suffixes, e.g. `"528 nm"`.
//!
//! Each dimension lists its accepted units with their SI scale as a power
//! of ten; the first entry is the display unit used when printing. Unit
//! conversion shifts the decimal exponent of the literal, so `"528 nm"`
//! parses to exactly the same float as `528e-9`.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub trait Dimension {
    const NAME: &'static str;
    const UNITS: &'static [(&'static str, i32)];
}

macro_rules! dimension {
    ($(#[$doc:meta])* $ty:ident, $name:literal, [$(($unit:literal, $scale:expr)),+ $(,)?]) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Dimension for $ty {
            const NAME: &'static str = $name;
            const UNITS: &'static [(&'static str, i32)] = &[$(($unit, $scale)),+];
        }
    };
}

dimension!(Length, "length", [("nm", -9), ("um", -6), ("m", 0)]);
dimension!(Time, "time", [("ns", -9), ("ps", -12), ("fs", -15), ("s", 0)]);
dimension!(CurrentDensity, "current density", [("MA/cm2", 10), ("A/m2", 0)]);
dimension!(EnergyDensity, "energy density", [("MJ/m3", 6), ("kJ/m3", 3), ("J/m3", 0)]);
dimension!(
    /// Interfacial DMI constant.
    SurfaceEnergy,
    "surface energy density",
    [("mJ/m2", -3), ("J/m2", 0)]
);
dimension!(
    /// Exchange stiffness.
    Stiffness,
    "exchange stiffness",
    [("pJ/m", -12), ("J/m", 0)]
);
dimension!(Magnetization, "magnetization", [("kA/m", 3), ("A/m", 0)]);
dimension!(Gyromagnetic, "gyromagnetic ratio", [("m/(A*s)", 0)]);

/// A value in SI units that is read and written with a unit suffix.
pub struct Quantity<D> {
    si: f64,
    _dim: PhantomData<D>,
}

impl<D> Quantity<D> {
    pub const fn si(si: f64) -> Self {
        Self { si, _dim: PhantomData }
    }

    pub fn value(&self) -> f64 {
        self.si
    }
}

impl<D> Clone for Quantity<D> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<D> Copy for Quantity<D> {}

impl<D> PartialEq for Quantity<D> {
    fn eq(&self, other: &Self) -> bool {
        self.si == other.si
    }
}

impl<D: Dimension> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parses `"<number> <unit>"` into SI.
pub fn parse_quantity<D: Dimension>(text: &str) -> Result<f64, String> {
    let accepted = || D::UNITS.iter().map(|u| u.0).collect::<Vec<_>>().join(", ");
    let text = text.trim();
    let Some((num, unit)) = text.split_once(char::is_whitespace) else {
        return Err(format!("{} `{text}` needs a unit (one of {})", D::NAME, accepted()));
    };
    let unit = unit.trim();
    let Some(&(_, shift)) = D::UNITS.iter().find(|u| u.0 == unit) else {
        return Err(format!("`{unit}` is not a unit of {} (expected one of {})", D::NAME, accepted()));
    };
    let not_number = || format!("`{num}` is not a number");
    let (mantissa, exp) = match num.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| not_number())?),
        None => (num, 0),
    };
    if mantissa.is_empty() || !mantissa.trim_start_matches(['+', '-']).chars().all(|c| c.is_ascii_digit() || c == '.') {
        return Err(not_number());
    }
    let value: f64 = format!("{mantissa}e{}", exp.saturating_add(shift)).parse().map_err(|_| not_number())?;
    if !value.is_finite() {
        return Err(format!("`{num}` is out of range"));
    }
    Ok(value)
}

/// Shortest decimal of `si` re-expressed with the exponent shifted by
/// `-shift`.
fn shifted_decimal(si: f64, shift: i32) -> String {
    let sci = format!("{si:e}");
    let (mantissa, exp) = sci.split_once('e').expect("`{:e}` always has an exponent");
    let exp = exp.parse::<i32>().expect("integer exponent") - shift;
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("", mantissa),
    };
    let digits: String = digits.chars().filter(|c| *c != '.').collect();
    if si == 0.0 {
        return format!("{sign}0");
    }
    if !(-6..=15).contains(&exp) {
        return format!("{mantissa}e{exp}");
    }
    // decimal point sits after `exp + 1` digits
    let point = exp + 1;
    if point <= 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{sign}{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{sign}{a}.{b}")
    }
}

fn decimal_exponent(x: f64) -> i32 {
    let sci = format!("{x:e}");
    sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0)
}

impl<D: Dimension> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // first unit giving a magnitude between 1e-3 and 1e6
        let exp10 = decimal_exponent(self.si.abs());
        let &(unit, shift) =
            D::UNITS.iter().find(|(_, s)| self.si != 0.0 && (-3..6).contains(&(exp10 - s))).unwrap_or(&D::UNITS[0]);
        write!(f, "{} {unit}", shifted_decimal(self.si, shift))
    }
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct QuantityVisitor<D>(PhantomData<D>);

impl<D: Dimension> Visitor<'_> for QuantityVisitor<D> {
    type Value = Quantity<D>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a {} with unit, e.g. \"1 {}\"", D::NAME, D::UNITS[0].0)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        parse_quantity::<D>(v).map(Quantity::si).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        Err(E::custom(format!("{} {v} needs a unit, e.g. \"{v} {}\"", D::NAME, D::UNITS[0].0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        d.deserialize_any(QuantityVisitor(PhantomData))
    }
}
