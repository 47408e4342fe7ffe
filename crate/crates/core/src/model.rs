//! A concrete crystal + pump + lattice configuration and its two passes.

use crate::error::Result;
use crate::lattice::Lattice;
use crate::physics::{CrystalGeometry, Dispersion, PumpProfile};
use crate::propagator::{integrate_rk, ConstantCoupling, Pass, PdcCoupling, RkOptions, TransferPair};
use serde::{Deserialize, Serialize};

/// Which generator drives the passes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingModel {
    /// Gaussian pump with phase matching from the dispersion model.
    #[default]
    Pdc,
    /// `coupling * I`: independent lattice points, `B = sinh(coupling z)`.
    DiagonalToy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Setup {
    pub lattice: Lattice,
    pub dispersion: Dispersion,
    pub pump: PumpProfile,
    pub geometry: CrystalGeometry,
    pub rk: RkOptions,
    #[serde(default)]
    pub model: CouplingModel,
}

impl Setup {
    /// 800 nm degenerate BBO, 3 mm crystal, 70 um pump waist, +-60 mrad grid.
    pub fn reference(n: usize) -> Result<Self> {
        let dispersion = Dispersion::bbo_800nm();
        let lattice = Lattice::from_angle(n, 0.06, dispersion.vacuum, dispersion.evanescent_guard())?;
        Ok(Self {
            lattice,
            dispersion,
            pump: PumpProfile::from_waist(70e-6),
            geometry: CrystalGeometry { length: 3e-3 },
            rk: RkOptions::default(),
            model: CouplingModel::Pdc,
        })
    }

    pub fn coupling(&self, gamma: f64, pass: Pass) -> Result<PdcCoupling> {
        PdcCoupling::new(&self.lattice, &self.dispersion, &self.pump, &self.geometry, gamma, pass)
    }

    fn integrate(&self, gamma: f64, pass: Pass, span: (f64, f64)) -> Result<TransferPair> {
        match self.model {
            CouplingModel::Pdc => integrate_rk(&self.coupling(gamma, pass)?, span, &self.rk),
            CouplingModel::DiagonalToy => integrate_rk(&ConstantCoupling::diagonal(&self.lattice, gamma), span, &self.rk),
        }
    }

    pub fn first_pass(&self, gamma: f64) -> Result<TransferPair> {
        let mut p = self.integrate(gamma, Pass::First, self.geometry.first_span())?;
        p.meta.label = "pass1".into();
        p.meta.coupling = Some(gamma);
        p.meta.pump_phase = Some(0.0);
        Ok(p)
    }

    /// Second pass without the pump phase; fold it in with
    /// [`TransferPair::with_pump_phase`].
    pub fn second_pass(&self, gamma: f64, air_gap: f64) -> Result<TransferPair> {
        let mut p = self.integrate(gamma, Pass::Second { air_gap, pump_phase: None }, self.geometry.second_span())?;
        p.meta.label = "pass2".into();
        p.meta.coupling = Some(gamma);
        p.meta.air_gap = Some(air_gap);
        p.meta.pump_phase = None;
        Ok(p)
    }
}
