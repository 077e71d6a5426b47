//! Micromagnetic kernels for a skyrmion-based synaptic device.
//!
//! A ferromagnetic nanotrack with interfacial DMI is split by a gated
//! high-anisotropy barrier into a presynapse and a postsynapse region.
//! Spin-transfer torque pulses push skyrmions across the barrier; the
//! skyrmion population of the postsynapse is the synaptic weight.
//!
//! The crate builds without `std` (it needs `alloc`) when the default `std`
//! feature is disabled. File formats, configuration and the
//! command-line driver live in the `skysyn` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is deliberate throughout: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod material;
mod math;
pub mod state;
pub mod synapse;
pub mod vec3;

pub use device::{BarrierSpec, DeviceConfig, DeviceModel, Region, RegionFilter};
pub use dynamics::{DriveState, Integrator, IntegratorConfig, RelaxConfig, RelaxMethod, RelaxOutcome, Scheme, Segment};
pub use error::{Error, Result};
pub use field::{EnergyBreakdown, FieldKernel, Terms};
pub use material::{DemagMode, MaterialParams};
pub use state::{CorePolarity, MagnetizationState, VectorField};
pub use synapse::{ProtocolConfig, PulseTrain, Synapse, SynapseTrace};
pub use vec3::Vec3;
