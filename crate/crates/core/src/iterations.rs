//! The registry of parametrized matrix iterations.
//!
//! Every action the planner can take is one of these iterations: a scalar
//! map on paired spectra `(x_i, y_i, lambda_i)` and the equivalent dense
//! matrix map. Both forms are rational functions of their inputs, hence
//! congruence invariant and diagonal preserving, which is what lets the
//! search run on spectra and the result replay on dense matrices.
//!
//! Cost profiles count the O(d^3) primitives (matmuls and inverses) per
//! application under a frozen left-to-right association order with operand
//! reuse; O(d^2) scalings and additions are tracked as `add_scale` but all
//! registered iterations charge zero of them. The 1/3-root Newton step uses
//! `A^{-2}`, which is computed once per episode and cached; its cost is a
//! separate setup profile charged on first use.

use alloc::vec::Vec;
use core::fmt;

use crate::matcore::{sym_inverse, sym_matmul, MatError, Matrix};

/// Matrix function being computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MatrixFunction {
    Inverse,
    Sign,
    Sqrt,
    Proot,
}

impl MatrixFunction {
    pub fn name(self) -> &'static str {
        match self {
            MatrixFunction::Inverse => "inverse",
            MatrixFunction::Sign => "sign",
            MatrixFunction::Sqrt => "sqrt",
            MatrixFunction::Proot => "proot",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "inverse" => MatrixFunction::Inverse,
            "sign" => MatrixFunction::Sign,
            "sqrt" => MatrixFunction::Sqrt,
            "proot" => MatrixFunction::Proot,
            _ => return None,
        })
    }

    /// The target scalar map `f(lambda)`.
    pub fn scalar(self, lam: f64) -> f64 {
        match self {
            MatrixFunction::Inverse => 1.0 / lam,
            MatrixFunction::Sign => crate::fm::signum0(lam),
            MatrixFunction::Sqrt => crate::fm::sqrt(lam),
            MatrixFunction::Proot => crate::fm::cbrt(lam),
        }
    }
}

impl fmt::Display for MatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How an iteration interacts with the auxiliary variable `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CouplingClass {
    /// Updates `X` and `Y` together, relying on their algebraic relation.
    Coupled,
    /// Updates `X` alone, invalidating the relation.
    Uncoupled,
    /// Restores the relation (`Y` from `X` and `A`); takes no parameters.
    CouplingStep,
}

/// Identifier of a registered iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IterationId {
    #[cfg_attr(feature = "serde", serde(rename = "Inv_NS"))]
    InvNs,
    #[cfg_attr(feature = "serde", serde(rename = "Inv_Chebyshev"))]
    InvChebyshev,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_NS"))]
    SignNs,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_Newton"))]
    SignNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_Quintic"))]
    SignQuintic,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_Halley"))]
    SignHalley,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_DB"))]
    SqrtDb,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_NSV"))]
    SqrtNsv,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_Visser"))]
    SqrtVisser,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_VisserCoupled"))]
    SqrtVisserCoupled,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_Coupling"))]
    SqrtCoupling,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Newton"))]
    ProotNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Visser"))]
    ProotVisser,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Iannazzo"))]
    ProotIannazzo,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Coupling"))]
    ProotCoupling,
}

impl IterationId {
    pub fn name(self) -> &'static str {
        match self {
            IterationId::InvNs => "Inv_NS",
            IterationId::InvChebyshev => "Inv_Chebyshev",
            IterationId::SignNs => "Sign_NS",
            IterationId::SignNewton => "Sign_Newton",
            IterationId::SignQuintic => "Sign_Quintic",
            IterationId::SignHalley => "Sign_Halley",
            IterationId::SqrtDb => "Sqrt_DB",
            IterationId::SqrtNsv => "Sqrt_NSV",
            IterationId::SqrtVisser => "Sqrt_Visser",
            IterationId::SqrtVisserCoupled => "Sqrt_VisserCoupled",
            IterationId::SqrtCoupling => "Sqrt_Coupling",
            IterationId::ProotNewton => "Proot_Newton",
            IterationId::ProotVisser => "Proot_Visser",
            IterationId::ProotIannazzo => "Proot_Iannazzo",
            IterationId::ProotCoupling => "Proot_Coupling",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        ALL_ITERATIONS.iter().copied().find(|id| id.name() == name)
    }
}

impl fmt::Display for IterationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const ALL_ITERATIONS: [IterationId; 15] = [
    IterationId::InvNs,
    IterationId::InvChebyshev,
    IterationId::SignNs,
    IterationId::SignNewton,
    IterationId::SignQuintic,
    IterationId::SignHalley,
    IterationId::SqrtDb,
    IterationId::SqrtNsv,
    IterationId::SqrtVisser,
    IterationId::SqrtVisserCoupled,
    IterationId::SqrtCoupling,
    IterationId::ProotNewton,
    IterationId::ProotVisser,
    IterationId::ProotIannazzo,
    IterationId::ProotCoupling,
];

/// Primitive-operation counts for one application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostProfile {
    pub matmul: u32,
    pub inverse: u32,
    pub add_scale: u32,
}

impl CostProfile {
    pub const fn new(matmul: u32, inverse: u32) -> Self {
        CostProfile {
            matmul,
            inverse,
            add_scale: 0,
        }
    }
}

/// One registered iteration.
#[derive(Clone, Debug)]
pub struct IterationSpec {
    pub id: IterationId,
    pub function: MatrixFunction,
    pub ranges: &'static [(f64, f64)],
    pub coupling: CouplingClass,
    pub cost: CostProfile,
    /// Charged once per episode on first application (the `A^{-2}` cache of
    /// the 1/3-root Newton step).
    pub setup_cost: Option<CostProfile>,
}

impl IterationSpec {
    #[inline]
    pub fn n_params(&self) -> usize {
        self.ranges.len()
    }
}

const R05_2: [(f64, f64); 2] = [(0.0, 5.0), (0.0, 5.0)];
const R05_3: [(f64, f64); 3] = [(0.0, 5.0), (0.0, 5.0), (0.0, 5.0)];
const R040_1: [(f64, f64); 1] = [(0.0, 40.0)];
const R040_3: [(f64, f64); 3] = [(0.0, 40.0), (0.0, 40.0), (0.0, 40.0)];
const R050_2: [(f64, f64); 2] = [(0.0, 50.0), (0.0, 50.0)];
const R010_2: [(f64, f64); 2] = [(0.0, 10.0), (0.0, 10.0)];
const R_NONE: [(f64, f64); 0] = [];

static INVERSE_ACTIONS: [IterationSpec; 2] = [
    IterationSpec {
        id: IterationId::InvNs,
        function: MatrixFunction::Inverse,
        ranges: &R05_2,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(2, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::InvChebyshev,
        function: MatrixFunction::Inverse,
        ranges: &R05_3,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(4, 0),
        setup_cost: None,
    },
];

static SIGN_ACTIONS: [IterationSpec; 4] = [
    IterationSpec {
        id: IterationId::SignNs,
        function: MatrixFunction::Sign,
        ranges: &R05_2,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(2, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SignNewton,
        function: MatrixFunction::Sign,
        ranges: &R040_1,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(0, 1),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SignQuintic,
        function: MatrixFunction::Sign,
        ranges: &R05_3,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(3, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SignHalley,
        function: MatrixFunction::Sign,
        ranges: &R040_3,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(3, 1),
        setup_cost: None,
    },
];

static SQRT_ACTIONS: [IterationSpec; 5] = [
    IterationSpec {
        id: IterationId::SqrtDb,
        function: MatrixFunction::Sqrt,
        ranges: &R050_2,
        coupling: CouplingClass::Coupled,
        cost: CostProfile::new(0, 2),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SqrtNsv,
        function: MatrixFunction::Sqrt,
        ranges: &R05_2,
        coupling: CouplingClass::Coupled,
        cost: CostProfile::new(3, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SqrtVisser,
        function: MatrixFunction::Sqrt,
        ranges: &R010_2,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(1, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SqrtVisserCoupled,
        function: MatrixFunction::Sqrt,
        ranges: &R010_2,
        coupling: CouplingClass::Coupled,
        cost: CostProfile::new(2, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::SqrtCoupling,
        function: MatrixFunction::Sqrt,
        ranges: &R_NONE,
        coupling: CouplingClass::CouplingStep,
        cost: CostProfile::new(1, 1),
        setup_cost: None,
    },
];

static PROOT_ACTIONS: [IterationSpec; 4] = [
    IterationSpec {
        id: IterationId::ProotNewton,
        function: MatrixFunction::Proot,
        ranges: &R010_2,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(1, 0),
        setup_cost: Some(CostProfile::new(1, 1)),
    },
    IterationSpec {
        id: IterationId::ProotVisser,
        function: MatrixFunction::Proot,
        ranges: &R010_2,
        coupling: CouplingClass::Uncoupled,
        cost: CostProfile::new(2, 0),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::ProotIannazzo,
        function: MatrixFunction::Proot,
        ranges: &R010_2,
        coupling: CouplingClass::Coupled,
        cost: CostProfile::new(4, 1),
        setup_cost: None,
    },
    IterationSpec {
        id: IterationId::ProotCoupling,
        function: MatrixFunction::Proot,
        ranges: &R_NONE,
        coupling: CouplingClass::CouplingStep,
        cost: CostProfile::new(3, 1),
        setup_cost: None,
    },
];

/// Action list of a matrix function, in expansion order.
pub fn registry(function: MatrixFunction) -> &'static [IterationSpec] {
    match function {
        MatrixFunction::Inverse => &INVERSE_ACTIONS,
        MatrixFunction::Sign => &SIGN_ACTIONS,
        MatrixFunction::Sqrt => &SQRT_ACTIONS,
        MatrixFunction::Proot => &PROOT_ACTIONS,
    }
}

/// Look up one iteration by id.
pub fn iteration(id: IterationId) -> &'static IterationSpec {
    for function in [
        MatrixFunction::Inverse,
        MatrixFunction::Sign,
        MatrixFunction::Sqrt,
        MatrixFunction::Proot,
    ] {
        for spec in registry(function) {
            if spec.id == id {
                return spec;
            }
        }
    }
    unreachable!("every IterationId is registered")
}

/// Order-consistent position of `id` in its function's registry.
pub fn registry_index(id: IterationId) -> usize {
    registry(iteration(id).function)
        .iter()
        .position(|s| s.id == id)
        .expect("registered")
}

/// The iterate diverged: a denominator fell below `1e-300` or an output
/// stopped being finite. The caller treats the state as failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Divergence;

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("iteration diverged")
    }
}

const DENOM_FLOOR: f64 = 1e-300;

#[inline]
fn recip(v: f64) -> Result<f64, Divergence> {
    if crate::fm::abs(v) < DENOM_FLOOR {
        return Err(Divergence);
    }
    Ok(1.0 / v)
}

/// Apply the iteration's scalar map elementwise to paired spectra.
///
/// `x`, `y`, `lam` must share a length; `p` must carry exactly the
/// iteration's parameter count.
pub fn apply_spectral(
    spec: &IterationSpec,
    x: &[f64],
    y: &[f64],
    lam: &[f64],
    p: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), Divergence> {
    assert_eq!(x.len(), lam.len(), "spectra must share the input dimension");
    assert_eq!(y.len(), lam.len(), "spectra must share the input dimension");
    assert_eq!(
        p.len(),
        spec.n_params(),
        "{} takes {} parameters",
        spec.id,
        spec.n_params()
    );
    let n = x.len();
    let mut nx = Vec::with_capacity(n);
    let mut ny = Vec::with_capacity(n);
    for i in 0..n {
        let (xi, yi, li) = (x[i], y[i], lam[i]);
        let (xo, yo) = match spec.id {
            IterationId::InvNs => {
                let (a, b) = (p[0], p[1]);
                (a * xi - b * li * xi * xi, yi)
            }
            IterationId::InvChebyshev => {
                let (a, b, c) = (p[0], p[1], p[2]);
                (
                    a * xi - b * li * xi * xi + c * li * li * xi * xi * xi,
                    yi,
                )
            }
            IterationId::SignNewton => {
                let w = p[0] * xi;
                (0.5 * (w + recip(w)?), yi)
            }
            IterationId::SignNs => {
                let (a, b) = (p[0], p[1]);
                let t = b * xi;
                (xi + a * (t - t * t * t), yi)
            }
            IterationId::SignQuintic => {
                let (a, b, c) = (p[0], p[1], p[2]);
                let x2 = xi * xi;
                (a * xi + b * xi * x2 + c * xi * x2 * x2, yi)
            }
            IterationId::SignHalley => {
                let (a, b, c) = (p[0], p[1], p[2]);
                let x2 = xi * xi;
                (xi * (a + b * x2) * recip(1.0 + c * x2)?, yi)
            }
            IterationId::SqrtDb => {
                let (a, b) = (p[0], p[1]);
                let wx = a * xi;
                let wy = b * yi;
                (0.5 * (wx + recip(wy)?), 0.5 * (wy + recip(wx)?))
            }
            IterationId::SqrtNsv => {
                let (a, b) = (p[0], p[1]);
                (
                    0.5 * (a * xi - b * xi * xi * yi),
                    0.5 * (a * yi - b * yi * yi * xi),
                )
            }
            IterationId::SqrtVisser => {
                let (a, b) = (p[0], p[1]);
                (a * xi + b * (li - xi * xi), yi)
            }
            IterationId::SqrtVisserCoupled => {
                let (a, b) = (p[0], p[1]);
                (
                    a * xi + b * (li - xi * xi),
                    a * yi + b * (1.0 - xi * yi),
                )
            }
            IterationId::SqrtCoupling => (xi, xi * recip(li)?),
            IterationId::ProotNewton => {
                let (a, b) = (p[0], p[1]);
                let inv_l2 = recip(li * li)?;
                ((a * xi + b * xi * inv_l2) / 3.0, yi)
            }
            IterationId::ProotVisser => {
                let (a, b) = (p[0], p[1]);
                (a * xi + b * (li - xi * xi * xi), yi)
            }
            IterationId::ProotIannazzo => {
                let (a, b) = (p[0], p[1]);
                let bf = (a + b * yi) / 3.0;
                let inv = recip(bf)?;
                (xi * bf, yi * inv * inv * inv)
            }
            IterationId::ProotCoupling => {
                let x3 = xi * xi * xi;
                (xi, li * recip(x3)?)
            }
        };
        if !xo.is_finite() || !yo.is_finite() {
            return Err(Divergence);
        }
        nx.push(xo);
        ny.push(yo);
    }
    Ok((nx, ny))
}

/// Per-episode cache for matrix-form iterations (`A^{-2}` of the 1/3-root
/// Newton step). One cache per replayed trajectory.
#[derive(Debug, Default)]
pub struct EpisodeCache {
    a_inv2: Option<Matrix>,
}

impl EpisodeCache {
    pub fn new() -> Self {
        EpisodeCache::default()
    }

    /// True once the `A^{-2}` setup cost has been incurred.
    pub fn newton_cache_ready(&self) -> bool {
        self.a_inv2.is_some()
    }

    fn a_inv2(&mut self, a: &Matrix) -> Result<&Matrix, Divergence> {
        if self.a_inv2.is_none() {
            let inv = sym_inverse(a).map_err(|_| Divergence)?;
            let inv2 = sym_matmul(&inv, &inv).map_err(|_| Divergence)?;
            self.a_inv2 = Some(inv2);
        }
        Ok(self.a_inv2.as_ref().expect("just set"))
    }
}

fn inv_or_diverge(m: &Matrix) -> Result<Matrix, Divergence> {
    match sym_inverse(m) {
        Ok(inv) => Ok(inv),
        Err(MatError::Singular { .. }) => Err(Divergence),
        Err(_) => Err(Divergence),
    }
}

fn mm(a: &Matrix, b: &Matrix) -> Result<Matrix, Divergence> {
    sym_matmul(a, b).map_err(|_| Divergence)
}

fn finite(m: &Matrix) -> bool {
    m.data().iter().all(|v| v.is_finite())
}

/// Dense analogue of [`apply_spectral`], with the association order frozen
/// to match each iteration's cost profile.
pub fn apply_matrix(
    spec: &IterationSpec,
    x: &Matrix,
    y: &Matrix,
    a: &Matrix,
    p: &[f64],
    cache: &mut EpisodeCache,
) -> Result<(Matrix, Matrix), Divergence> {
    assert_eq!(
        p.len(),
        spec.n_params(),
        "{} takes {} parameters",
        spec.id,
        spec.n_params()
    );
    let n = x.dim();
    assert!(y.dim() == n && a.dim() == n, "operands must share dim");
    let ident = || Matrix::identity(n);
    let (nx, ny) = match spec.id {
        IterationId::InvNs => {
            let (pa, pb) = (p[0], p[1]);
            let xa = mm(x, a)?;
            let xax = mm(&xa, x)?;
            let out = x.scale(pa).add_scaled(&xax, -pb).map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::InvChebyshev => {
            let (pa, pb, pc) = (p[0], p[1], p[2]);
            let xa = mm(x, a)?;
            let xax = mm(&xa, x)?;
            let xaxa = mm(&xax, a)?;
            let xaxax = mm(&xaxa, x)?;
            let out = x
                .scale(pa)
                .add_scaled(&xax, -pb)
                .and_then(|m| m.add_scaled(&xaxax, pc))
                .map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::SignNewton => {
            let w = x.scale(p[0]);
            let winv = inv_or_diverge(&w)?;
            let out = w.add_scaled(&winv, 1.0).map_err(|_| Divergence)?.scale(0.5);
            (out, y.clone())
        }
        IterationId::SignNs => {
            let (pa, pb) = (p[0], p[1]);
            let t = x.scale(pb);
            let t2 = mm(&t, &t)?;
            let t3 = mm(&t2, &t)?;
            let delta = t.add_scaled(&t3, -1.0).map_err(|_| Divergence)?;
            let out = x.add_scaled(&delta, pa).map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::SignQuintic => {
            let (pa, pb, pc) = (p[0], p[1], p[2]);
            let x2 = mm(x, x)?;
            let x3 = mm(&x2, x)?;
            let x5 = mm(&x2, &x3)?;
            let out = x
                .scale(pa)
                .add_scaled(&x3, pb)
                .and_then(|m| m.add_scaled(&x5, pc))
                .map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::SignHalley => {
            let (pa, pb, pc) = (p[0], p[1], p[2]);
            let x2 = mm(x, x)?;
            let numer = ident().scale(pa).add_scaled(&x2, pb).map_err(|_| Divergence)?;
            let denom = ident().add_scaled(&x2, pc).map_err(|_| Divergence)?;
            let dinv = inv_or_diverge(&denom)?;
            let xn = mm(x, &numer)?;
            (mm(&xn, &dinv)?, y.clone())
        }
        IterationId::SqrtDb => {
            let (pa, pb) = (p[0], p[1]);
            let wx = x.scale(pa);
            let wy = y.scale(pb);
            let wyi = inv_or_diverge(&wy)?;
            let wxi = inv_or_diverge(&wx)?;
            let nx = wx.add_scaled(&wyi, 1.0).map_err(|_| Divergence)?.scale(0.5);
            let ny = wy.add_scaled(&wxi, 1.0).map_err(|_| Divergence)?.scale(0.5);
            (nx, ny)
        }
        IterationId::SqrtNsv => {
            let (pa, pb) = (p[0], p[1]);
            let yx = mm(y, x)?;
            let xyx = mm(x, &yx)?;
            let yxy = mm(&yx, y)?;
            let nx = x.scale(pa).add_scaled(&xyx, -pb).map_err(|_| Divergence)?.scale(0.5);
            let ny = y.scale(pa).add_scaled(&yxy, -pb).map_err(|_| Divergence)?.scale(0.5);
            (nx, ny)
        }
        IterationId::SqrtVisser => {
            let (pa, pb) = (p[0], p[1]);
            let x2 = mm(x, x)?;
            let resid = a.add_scaled(&x2, -1.0).map_err(|_| Divergence)?;
            let out = x.scale(pa).add_scaled(&resid, pb).map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::SqrtVisserCoupled => {
            let (pa, pb) = (p[0], p[1]);
            let x2 = mm(x, x)?;
            let xy = mm(x, y)?;
            let rx = a.add_scaled(&x2, -1.0).map_err(|_| Divergence)?;
            let ry = ident().add_scaled(&xy, -1.0).map_err(|_| Divergence)?;
            let nx = x.scale(pa).add_scaled(&rx, pb).map_err(|_| Divergence)?;
            let ny = y.scale(pa).add_scaled(&ry, pb).map_err(|_| Divergence)?;
            (nx, ny)
        }
        IterationId::SqrtCoupling => {
            let ainv = inv_or_diverge(a)?;
            (x.clone(), mm(x, &ainv)?)
        }
        IterationId::ProotNewton => {
            let (pa, pb) = (p[0], p[1]);
            let ainv2 = cache.a_inv2(a)?.clone();
            let xai = mm(x, &ainv2)?;
            let out = x
                .scale(pa)
                .add_scaled(&xai, pb)
                .map_err(|_| Divergence)?
                .scale(1.0 / 3.0);
            (out, y.clone())
        }
        IterationId::ProotVisser => {
            let (pa, pb) = (p[0], p[1]);
            let x2 = mm(x, x)?;
            let x3 = mm(&x2, x)?;
            let resid = a.add_scaled(&x3, -1.0).map_err(|_| Divergence)?;
            let out = x.scale(pa).add_scaled(&resid, pb).map_err(|_| Divergence)?;
            (out, y.clone())
        }
        IterationId::ProotIannazzo => {
            let (pa, pb) = (p[0], p[1]);
            let bmat = ident().scale(pa).add_scaled(y, pb).map_err(|_| Divergence)?.scale(1.0 / 3.0);
            let nx = mm(x, &bmat)?;
            let binv = inv_or_diverge(&bmat)?;
            let b2 = mm(&binv, &binv)?;
            let b3 = mm(&b2, &binv)?;
            (nx, mm(&b3, y)?)
        }
        IterationId::ProotCoupling => {
            let x2 = mm(x, x)?;
            let x3 = mm(&x2, x)?;
            let x3inv = inv_or_diverge(&x3)?;
            (x.clone(), mm(a, &x3inv)?)
        }
    };
    if !finite(&nx) || !finite(&ny) {
        return Err(Divergence);
    }
    Ok((nx, ny))
}
