//! Material coefficients of the ferromagnet/heavy-metal film.

use crate::error::{Error, Result};

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// How magnetostatic self-interaction enters the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DemagMode {
    /// No magnetostatics at all.
    None,
    /// Thin-film local approximation: the shape anisotropy `μ0·Ms²/2` is
    /// subtracted from the uniaxial constant.
    #[default]
    EffectiveAnisotropy,
}

/// Physical constants of the film. All values SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Saturation magnetization, A/m.
    pub ms: f64,
    /// Gyromagnetic ratio magnitude (including μ0), m/(A·s).
    pub gamma: f64,
    /// Gilbert damping.
    pub alpha: f64,
    /// Spin polarization of the injected current.
    pub polarization: f64,
    /// Exchange stiffness, J/m.
    pub exchange: f64,
    /// Uniaxial anisotropy of the film, J/m³.
    pub ku_film: f64,
    /// Uniaxial anisotropy inside the gated barrier, J/m³.
    pub ku_barrier: f64,
    /// Interfacial DMI constant, J/m².
    pub dmi: f64,
    /// Ferromagnet thickness, m.
    pub thickness: f64,
    pub demag_mode: DemagMode,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            ms: 5.8e5,
            gamma: 2.211e5,
            alpha: 0.3,
            polarization: 0.4,
            exchange: 1.5e-11,
            ku_film: 0.7e6,
            ku_barrier: 0.84e6,
            dmi: 3.0e-3,
            thickness: 1e-9,
            demag_mode: DemagMode::EffectiveAnisotropy,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Material { name, reason: "must be finite and positive" })
            }
        };
        positive("Ms", self.ms)?;
        positive("gamma", self.gamma)?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Material { name: "alpha", reason: "must be finite and non-negative" });
        }
        positive("A_ex", self.exchange)?;
        positive("t_fm", self.thickness)?;
        if !(self.ku_film.is_finite() && self.ku_barrier.is_finite() && self.dmi.is_finite()) {
            return Err(Error::Material { name: "Ku/D", reason: "must be finite" });
        }
        if !(0.0..=1.0).contains(&self.polarization) {
            return Err(Error::Material { name: "P", reason: "must lie in [0, 1]" });
        }
        if self.ku_barrier < self.ku_film {
            return Err(Error::Material { name: "Ku_barrier", reason: "must not be below Ku_film" });
        }
        Ok(())
    }

    /// `μ0·Ms²`, the energy-density scale used to reduce fields, J/m³.
    pub fn magnetostatic_density(&self) -> f64 {
        MU0 * self.ms * self.ms
    }

    /// `sqrt(2·A/(μ0·Ms²))`, m.
    pub fn exchange_length(&self) -> f64 {
        crate::math::sqrt(2.0 * self.exchange / self.magnetostatic_density())
    }

    /// Anisotropy constant after the demag correction selected by `demag_mode`.
    pub fn effective_anisotropy(&self, ku: f64) -> f64 {
        match self.demag_mode {
            DemagMode::None => ku,
            DemagMode::EffectiveAnisotropy => ku - 0.5 * self.magnetostatic_density(),
        }
    }

    /// Wall width `sqrt(A/K_eff)` of the film, m.
    pub fn wall_width(&self) -> f64 {
        crate::math::sqrt(self.exchange / self.effective_anisotropy(self.ku_film))
    }

    /// Critical DMI `4·sqrt(A·K_eff)/π` above which the uniform state is
    /// unstable against spiral formation, J/m².
    pub fn critical_dmi(&self) -> f64 {
        4.0 * crate::math::sqrt(self.exchange * self.effective_anisotropy(self.ku_film)) / core::f64::consts::PI
    }

    /// Timescale conversion `γ·Ms`, 1/s. Reduced time is `γ·Ms·t`.
    pub fn frequency_scale(&self) -> f64 {
        self.gamma * self.ms
    }
}
