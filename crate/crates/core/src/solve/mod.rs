//! Dirichlet solves for the degenerate homogeneous complex Monge-Ampere
//! equation and assembly of the Green's function G = s + Phi - sum(eps).
//!
//! Two independent backends approximate the bounded remainder Phi:
//! a monotone circle-mean envelope (Perron iteration accelerated by policy
//! iteration) and a damped-Newton continuation solving
//! det(H_V + ddbar Phi) = t det(H_ref) down a geometric t-ladder. Both work
//! on the punctured domain with pole cores excised; the singular part is
//! carried analytically by the glued potential.

mod envelope;
mod newton;

pub use envelope::solve_envelope;
pub use newton::solve_regularized;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{ComplexGrid, DomainSpec, NodeMask};
use crate::hermitian::Hermitian;
use crate::singularity::{
    glued_hessian, glued_potential, max_feasible_epsilon, BackgroundSpec, SingularityData,
    SingularityError,
};
use crate::stencil::{lattice_directions, min_direction_laplacian, LatticeDirection};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Envelope,
    Regularized,
}

#[derive(Clone, Debug)]
pub enum SolveError {
    /// Validation failed; the message lists every violated constraint.
    InfeasibleProblem(String),
    /// Sweep budget exhausted; the last iterate is attached.
    NonConvergence { sweeps: usize, last: Box<SolveReport> },
    /// Newton failed to reduce the residual at continuation step t.
    NewtonDivergence { t: f64 },
    /// The positivity safeguard exhausted its step halvings at t.
    PositivityLoss { t: f64 },
    Singularity(SingularityError),
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::InfeasibleProblem(m) => write!(f, "infeasible problem: {m}"),
            SolveError::NonConvergence { sweeps, .. } => {
                write!(f, "no convergence after {sweeps} sweeps")
            }
            SolveError::NewtonDivergence { t } => write!(f, "Newton divergence at t = {t}"),
            SolveError::PositivityLoss { t } => write!(f, "positivity safeguard exhausted at t = {t}"),
            SolveError::Singularity(e) => write!(f, "{e}"),
        }
    }
}

impl From<SingularityError> for SolveError {
    fn from(e: SingularityError) -> Self {
        SolveError::Singularity(e)
    }
}

/// Solver knobs with the documented defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop when the sup-norm sweep update falls below tol_fix * extent.
    pub tol_fix: f64,
    pub max_sweeps: usize,
    /// Squared-norm cutoff of the lattice direction family.
    pub direction_norm_sq: u32,
    /// Continuation ladder t0 > t0*ratio > ... >= t_min.
    pub t0: f64,
    pub t_ratio: f64,
    pub t_min: f64,
    /// Inner linear solve: red-black sweeps cap and residual target.
    pub newton_inner_sweeps: usize,
    pub newton_inner_tol: f64,
    pub max_halvings: usize,
    /// Positivity margin for feasibility validation.
    pub feasibility_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_fix: 1e-8,
            max_sweeps: 100_000,
            direction_norm_sq: crate::stencil::DEFAULT_DIRECTION_NORM_SQ,
            t0: 1.0,
            t_ratio: 0.5,
            t_min: 1e-3,
            newton_inner_sweeps: 200,
            newton_inner_tol: 1e-10,
            max_halvings: 30,
            feasibility_margin: 1e-6,
        }
    }
}

/// Constant Dirichlet data; the Theorem-style problems use zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryData {
    pub value: f64,
}

/// A validated Green's-function problem.
#[derive(Clone, Debug)]
pub struct GreenProblem {
    pub domain: DomainSpec,
    pub background: BackgroundSpec,
    pub singularities: SingularityData,
    pub boundary: BoundaryData,
    /// Weight at which omega_delta positivity was certified.
    pub delta: f64,
    pub excision_radius: f64,
    pub config: SolverConfig,
}

impl GreenProblem {
    /// Validates all construction invariants, collecting every violation.
    pub fn new(
        domain: DomainSpec,
        background: BackgroundSpec,
        singularities: SingularityData,
        boundary: BoundaryData,
        excision_radius: f64,
        config: SolverConfig,
    ) -> Result<GreenProblem, SolveError> {
        use alloc::format;
        let mut errs: Vec<String> = Vec::new();
        if let Err(v) = singularities.validate(&domain) {
            errs.extend(v);
        }
        if !boundary.value.is_finite() {
            errs.push("boundary data must be finite".into());
        }
        for (m, p) in singularities.poles.iter().enumerate() {
            if excision_radius >= 0.5 * p.r_in() {
                errs.push(format!("excision radius must be below r_in/2 of pole {m}"));
            }
        }
        if excision_radius < domain.spacing() * 0.999 && !singularities.poles.is_empty() {
            errs.push("excision radius must cover at least one grid spacing".into());
        }
        let delta = singularities.poles.iter().map(|p| p.epsilon).fold(0.0f64, f64::max);
        if errs.is_empty() {
            match max_feasible_epsilon(
                &domain,
                &singularities,
                &background,
                config.feasibility_margin,
                delta.max(1e-6),
            ) {
                Ok(eps0) => {
                    if delta > eps0 {
                        errs.push(format!(
                            "delta = {delta} exceeds the feasible threshold {eps0}; \
                             raise the augmentation or lower the weights"
                        ));
                    }
                }
                Err(e) => errs.push(format!("{e}")),
            }
        }
        if errs.is_empty() {
            Ok(GreenProblem { domain, background, singularities, boundary, delta, excision_radius, config })
        } else {
            Err(SolveError::InfeasibleProblem(errs.join("; ")))
        }
    }

    /// Coefficient matrix of omega + i ddbar s at z with per-pole weights:
    /// the background Hessian the bounded remainder is solved against. The
    /// pseudoconvexity augmentation does not appear here (its potential is
    /// part of the remainder), only in the feasibility certificate.
    pub fn background_hessian(&self, z: &[f64]) -> Result<Hermitian, SingularityError> {
        let n = self.domain.complex_dim();
        Ok(self
            .background
            .base_matrix(n, z)
            .add(&glued_hessian(&self.domain, &self.singularities, z)?))
    }

    pub fn glued(&self, z: &[f64]) -> Result<f64, SingularityError> {
        glued_potential(&self.domain, &self.singularities, z)
    }

    pub fn total_weight(&self) -> f64 {
        self.singularities.total_weight()
    }

}

/// Node roles for the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Outside the analytic domain; never read nor written.
    Outside,
    /// Dirichlet band; fixed value.
    Boundary,
    /// Pole core: the bounded remainder is harmonically extended here so
    /// stencils reaching across the core stay usable.
    Core,
    /// Envelope/Newton unknown.
    Active,
}

/// Shared solver scaffolding: roles, strides, per-active-node background
/// Hessians and the exact lattice circle-means of the background potential.
pub(crate) struct Workspace {
    pub domain: DomainSpec,
    pub roles: Vec<Role>,
    pub strides: [i64; 4],
    pub axis_len: usize,
    pub dirs: Vec<LatticeDirection>,
    /// Stride deltas of the 4 stencil offsets per direction.
    pub deltas: Vec<[i64; 4]>,
    /// Node -> active-slot map (NO_SLOT when not active).
    pub slot_of: Vec<u32>,
    /// Packed Hermitian H_V per active slot: [a] or [a, d, re b, im b].
    pub hv: Vec<[f64; 4]>,
    /// Availability bitmask per active slot over the direction family.
    pub avail: Vec<u32>,
    /// Exact circle-mean increment of the background potential
    /// (mean over the 4 lattice stencil points of V) - V(p), per active
    /// slot and direction. This is what keeps the singular part telescoping
    /// through the sweeps; a quadratic-form shortcut accumulates O(h^4 D^4 s)
    /// errors catastrophically near the pole cores.
    pub cmean: Vec<f64>,
    pub h: f64,
}

const NO_SLOT: u32 = u32::MAX;

impl Workspace {
    pub fn build(problem: &GreenProblem) -> Result<Workspace, SolveError> {
        let d = problem.domain.clone();
        let n = d.complex_dim();
        let m = d.real_dim();
        let len = d.axis_len();
        let count = d.node_count();
        let mut strides = [0i64; 4];
        let mut s = 1i64;
        for a in (0..m).rev() {
            strides[a] = s;
            s *= len as i64;
        }
        let mut roles = vec![Role::Outside; count];
        let mut actives = Vec::new();
        let mut slot_of = vec![NO_SLOT; count];
        for i in 0..count {
            let z = d.coords(&d.unflatten(i));
            let role = match d.classify(&z[..m]) {
                NodeMask::Excised => Role::Outside,
                NodeMask::Boundary => Role::Boundary,
                NodeMask::Interior => {
                    let in_core = problem.singularities.poles.iter().any(|p| {
                        d.distance(&z[..m], &p.position[..m]) < problem.excision_radius
                    });
                    if in_core {
                        Role::Core
                    } else {
                        Role::Active
                    }
                }
            };
            roles[i] = role;
            if role == Role::Active {
                slot_of[i] = actives.len() as u32;
                actives.push(i);
            }
        }
        let dirs = lattice_directions(n, problem.config.direction_norm_sq);
        assert!(dirs.len() <= 32, "direction family exceeds the bitmask width");
        let mut deltas = Vec::with_capacity(dirs.len());
        for dir in &dirs {
            let mut ds = [0i64; 4];
            for (k, off) in dir.offsets.iter().enumerate() {
                ds[k] = (0..m).map(|a| off[a] * strides[a]).sum();
            }
            deltas.push(ds);
        }
        let nd = dirs.len();
        let h = d.spacing();
        let mut hv = vec![[0.0f64; 4]; actives.len()];
        let mut avail = vec![0u32; actives.len()];
        let mut cmean = vec![f64::NAN; actives.len() * nd];
        let potential = |z: &[f64]| -> Result<f64, SingularityError> {
            Ok(problem.background.base_potential(n, z)
                + glued_potential(&problem.domain, &problem.singularities, z)?)
        };
        for (slot, &i) in actives.iter().enumerate() {
            let z = d.coords(&d.unflatten(i));
            hv[slot] = pack_hermitian(&problem.background_hessian(&z[..m])?);
            let vp = match potential(&z[..m]) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let mut bits = 0u32;
            'dir: for (k, dir) in dirs.iter().enumerate() {
                let mut sum = 0.0f64;
                for off in &dir.offsets {
                    match d.neighbor(i, off) {
                        Some(q) if roles[q] != Role::Outside => {}
                        _ => continue 'dir,
                    }
                    let mut zq = z;
                    for a in 0..m {
                        zq[a] += off[a] as f64 * h;
                    }
                    match potential(&zq[..m]) {
                        Ok(v) if v.is_finite() => sum += v,
                        _ => continue 'dir,
                    }
                }
                bits |= 1 << k;
                cmean[slot * nd + k] = 0.25 * sum - vp;
            }
            avail[slot] = bits;
        }
        Ok(Workspace {
            h,
            domain: d,
            roles,
            strides,
            axis_len: len,
            dirs,
            deltas,
            slot_of,
            hv,
            avail,
            cmean,
        })
    }

    #[inline]
    pub fn slot(&self, node: usize) -> usize {
        debug_assert_ne!(self.slot_of[node], NO_SLOT);
        self.slot_of[node] as usize
    }

    /// Neighbor flat index for a stencil delta (non-periodic domains only;
    /// availability masks guarantee legality).
    #[inline]
    pub fn shifted(&self, i: usize, delta: i64) -> usize {
        (i as i64 + delta) as usize
    }

    /// Axis neighbors for the harmonic extension on core nodes.
    pub fn axis_neighbors(&self, i: usize) -> Vec<usize> {
        let m = self.domain.real_dim();
        let mut out = Vec::with_capacity(2 * m);
        for a in 0..m {
            for sgn in [1i64, -1] {
                let mut off = [0i64; 4];
                off[a] = sgn;
                if let Some(q) = self.domain.neighbor(i, &off) {
                    if self.roles[q] != Role::Outside {
                        out.push(q);
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn pack_hermitian(h: &Hermitian) -> [f64; 4] {
    if h.n() == 1 {
        [h.get(0, 0).re, 0.0, 0.0, 0.0]
    } else {
        let b = h.get(0, 1);
        [h.get(0, 0).re, h.get(1, 1).re, b.re, b.im]
    }
}

/// Solve outcome: the bounded remainder, the assembled Green's function and
/// the diagnostics ledger.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub backend: Backend,
    pub phi: ComplexGrid,
    pub green: ComplexGrid,
    /// Maximality defect: sup over interior nodes of the positive part of
    /// 4 lambda_min(H_V + ddbar Phi), centered-difference Hessian.
    pub residual_max: f64,
    /// Most negative eigenvalue of H_V + ddbar Phi on exit.
    pub psh_min: f64,
    pub iterations: usize,
    /// (t, sup |grad Phi| exp(-C2 Phi)) along the continuation; empty for
    /// the envelope backend.
    pub c1_trace: Vec<(f64, f64)>,
    pub c2_calibrated: f64,
}

/// Pointwise assembly G = s + Phi - sum(eps) off the excised cores, with
/// exact boundary assignment.
pub fn assemble_green(problem: &GreenProblem, phi: &ComplexGrid) -> ComplexGrid {
    let total_eps = problem.total_weight();
    let mut green = phi.clone();
    for i in 0..green.values.len() {
        match green.mask[i] {
            NodeMask::Excised => {}
            NodeMask::Boundary => {
                green.values[i] = problem.boundary.value;
            }
            NodeMask::Interior => {
                let z = green.node_coords(i);
                match problem.glued(&z[..problem.domain.real_dim()]) {
                    Ok(s) => green.values[i] = s + phi.values[i] - total_eps,
                    Err(_) => {
                        green.mask[i] = NodeMask::Excised;
                        green.values[i] = f64::NAN;
                    }
                }
            }
        }
    }
    green
}

/// Shared exit diagnostics: maximality defect and plurisubharmonicity floor
/// of the full potential u = base potential + s + Phi, measured by the
/// direction-circle Laplacian on grid values alone (so both backends are
/// judged by the same independent yardstick, not by their own stencils).
///
/// Nodes inside a pole ball plus a two-cell shell are skipped (there the
/// analytic log model dominates, its degenerate positivity holds
/// symbolically, and grid differences only report O(h^2 D^4 s) noise); so
/// are stencils touching the Dirichlet band, whose assignment kink is data,
/// not defect.
pub(crate) fn exit_diagnostics(problem: &GreenProblem, phi: &ComplexGrid) -> (f64, f64) {
    let m = problem.domain.real_dim();
    let n = problem.domain.complex_dim();
    let h = problem.domain.spacing();
    let mut u = phi.clone();
    for i in 0..u.values.len() {
        if u.mask[i] != NodeMask::Excised {
            let z = u.node_coords(i);
            let Ok(s) = problem.glued(&z[..m]) else {
                u.mask[i] = NodeMask::Excised;
                u.values[i] = f64::NAN;
                continue;
            };
            u.values[i] += problem.background.base_potential(n, &z[..m]) + s;
        }
    }
    let dirs: Vec<[crate::C64; 2]> =
        lattice_directions(n, problem.config.direction_norm_sq).iter().map(|d| d.unit()).collect();
    let reach = libm::sqrt(problem.config.direction_norm_sq as f64);
    let mut defect = 0.0f64;
    let mut floor = f64::INFINITY;
    for i in u.interior_nodes() {
        let z = u.node_coords(i);
        let shell = (1.0 + reach) * h;
        let in_ball = problem
            .singularities
            .poles
            .iter()
            .any(|p| problem.domain.distance(&z[..m], &p.position[..m]) < p.r_out() + shell);
        if in_ball {
            continue;
        }
        let bd = problem.domain.kind.boundary_distance(&z[..m]);
        if bd < (1.0 + reach) * h {
            continue;
        }
        if let Ok(lap) = min_direction_laplacian(&u, i, &dirs) {
            defect = defect.max(lap.max(0.0));
            floor = floor.min(lap / 4.0);
        }
    }
    if !floor.is_finite() {
        floor = 0.0;
    }
    (defect, floor)
}

/// Builds the Phi grid (mask: cores and the outside excised) from workspace
/// roles and raw values.
pub(crate) fn phi_grid(ws: &Workspace, values: &[f64]) -> ComplexGrid {
    let mut g = ComplexGrid::zeros(&ws.domain);
    for i in 0..values.len() {
        match ws.roles[i] {
            Role::Outside | Role::Core => {
                g.mask[i] = NodeMask::Excised;
                g.values[i] = f64::NAN;
            }
            Role::Boundary => {
                g.mask[i] = NodeMask::Boundary;
                g.values[i] = values[i];
            }
            Role::Active => {
                g.mask[i] = NodeMask::Interior;
                g.values[i] = values[i];
            }
        }
    }
    g
}

/// Sup-norm discrepancy between the two backends' Green's functions on the
/// commonly valued nodes.
pub fn uniqueness_check(problem: &GreenProblem) -> Result<(SolveReport, SolveReport, f64), SolveError> {
    let env = solve_envelope(problem)?;
    let reg = solve_regularized(problem)?;
    let d = env.green.sup_diff(&reg.green);
    Ok((env, reg, d))
}
