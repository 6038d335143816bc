//! Per-iteration wall-clock cost tables.
//!
//! A [`CostTable`] prices every registered iteration of one matrix function
//! in seconds (measured mode) or in matmul-equivalent units (static mode).
//! Static tables make search results hardware-independent and reproducible;
//! swapping tables with different inverse:matmul ratios is how environment
//! adaptivity is exercised. In static mode each per-iteration cost is
//! exactly the dot product of the iteration's primitive counts with the
//! unit costs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use crate::iterations::{registry, CostProfile, IterationId, MatrixFunction};

/// Arithmetic precision of the priced kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "single" | "float32" | "f32" => Some(Precision::Single),
            "double" | "float64" | "f64" => Some(Precision::Double),
            _ => None,
        }
    }
}

/// What the table was built for.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostContext {
    pub dim: usize,
    pub precision: Precision,
    pub device: String,
}

impl CostContext {
    pub fn static_default() -> Self {
        CostContext {
            dim: 0,
            precision: Precision::Double,
            device: String::from("static"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CostMode {
    Measured,
    Static,
}

/// Seconds (or matmul-units) per primitive operation.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitCosts {
    pub matmul: f64,
    pub inverse: f64,
    pub add_scale: f64,
}

impl UnitCosts {
    /// Static defaults: matmul-normalized, inverse at 3x (midpoint of the
    /// observed inverse:matmul ratio band), AXPY pass nominal.
    pub fn static_default() -> Self {
        UnitCosts {
            matmul: 1.0,
            inverse: 3.0,
            add_scale: 1e-3,
        }
    }

    /// Same defaults with the inverse priced at `ratio` matmuls.
    pub fn static_with_inverse_ratio(ratio: f64) -> Self {
        UnitCosts {
            inverse: ratio,
            ..UnitCosts::static_default()
        }
    }

    pub fn price(&self, profile: &CostProfile) -> f64 {
        self.matmul * profile.matmul as f64
            + self.inverse * profile.inverse as f64
            + self.add_scale * profile.add_scale as f64
    }

    pub fn valid(&self) -> bool {
        self.matmul > 0.0 && self.inverse > 0.0 && self.add_scale > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostError {
    InvalidUnits,
    MissingProfile(IterationId),
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::InvalidUnits => f.write_str("unit costs must all be positive"),
            CostError::MissingProfile(id) => write!(f, "no cost entry for iteration {id}"),
        }
    }
}

/// Prices for one matrix function's registered iterations.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostTable {
    pub context: CostContext,
    pub unit_costs: UnitCosts,
    pub per_iteration: BTreeMap<IterationId, f64>,
    /// First-use surcharges (episode caches such as `A^{-2}`).
    pub per_setup: BTreeMap<IterationId, f64>,
    pub mode: CostMode,
}

impl CostTable {
    /// Price every iteration of `function` from unit costs.
    pub fn build(
        mode: CostMode,
        function: MatrixFunction,
        unit_costs: UnitCosts,
        context: CostContext,
    ) -> Result<CostTable, CostError> {
        if !unit_costs.valid() {
            return Err(CostError::InvalidUnits);
        }
        let mut per_iteration = BTreeMap::new();
        let mut per_setup = BTreeMap::new();
        for spec in registry(function) {
            per_iteration.insert(spec.id, unit_costs.price(&spec.cost));
            if let Some(setup) = &spec.setup_cost {
                per_setup.insert(spec.id, unit_costs.price(setup));
            }
        }
        Ok(CostTable {
            context,
            unit_costs,
            per_iteration,
            per_setup,
            mode,
        })
    }

    /// Static table with the default units.
    pub fn static_default(function: MatrixFunction) -> CostTable {
        CostTable::build(
            CostMode::Static,
            function,
            UnitCosts::static_default(),
            CostContext::static_default(),
        )
        .expect("default units are positive")
    }

    pub fn cost(&self, id: IterationId) -> Result<f64, CostError> {
        self.per_iteration
            .get(&id)
            .copied()
            .ok_or(CostError::MissingProfile(id))
    }

    pub fn setup_cost(&self, id: IterationId) -> f64 {
        self.per_setup.get(&id).copied().unwrap_or(0.0)
    }

    /// Price an arbitrary profile with this table's units (baseline steps
    /// that are not registry actions).
    pub fn price_profile(&self, profile: &CostProfile) -> f64 {
        self.unit_costs.price(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_prices_match_profiles() {
        let t = CostTable::static_default(MatrixFunction::Sign);
        assert_eq!(t.cost(IterationId::SignNewton).unwrap(), 3.0);
        assert_eq!(t.cost(IterationId::SignNs).unwrap(), 2.0);
        assert_eq!(t.cost(IterationId::SignQuintic).unwrap(), 3.0);
        assert_eq!(t.cost(IterationId::SignHalley).unwrap(), 6.0);
    }

    #[test]
    fn missing_profile_is_an_error() {
        let t = CostTable::static_default(MatrixFunction::Sign);
        assert!(matches!(
            t.cost(IterationId::SqrtDb),
            Err(CostError::MissingProfile(IterationId::SqrtDb))
        ));
    }

    #[test]
    fn uniform_scaling_scales_every_price() {
        let base = CostTable::static_default(MatrixFunction::Sqrt);
        let scaled = CostTable::build(
            CostMode::Static,
            MatrixFunction::Sqrt,
            UnitCosts {
                matmul: 2.0,
                inverse: 6.0,
                add_scale: 2e-3,
            },
            CostContext::static_default(),
        )
        .unwrap();
        for (id, &cost) in &base.per_iteration {
            assert!((scaled.per_iteration[id] - 2.0 * cost).abs() < 1e-15);
        }
        for (id, &cost) in &base.per_setup {
            assert!((scaled.per_setup[id] - 2.0 * cost).abs() < 1e-15);
        }
    }

    #[test]
    fn proot_setup_priced() {
        let t = CostTable::static_default(MatrixFunction::Proot);
        // steady state: one matmul; setup: inverse + matmul
        assert_eq!(t.cost(IterationId::ProotNewton).unwrap(), 1.0);
        assert_eq!(t.setup_cost(IterationId::ProotNewton), 4.0);
        assert_eq!(t.setup_cost(IterationId::ProotVisser), 0.0);
    }

    #[test]
    fn invalid_units_rejected() {
        let res = CostTable::build(
            CostMode::Static,
            MatrixFunction::Sign,
            UnitCosts {
                matmul: 0.0,
                inverse: 3.0,
                add_scale: 1e-3,
            },
            CostContext::static_default(),
        );
        assert!(matches!(res, Err(CostError::InvalidUnits)));
    }
}
