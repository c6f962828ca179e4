//! Uniform sample grids over model domains in C^1 and C^2.
//!
//! A domain is sampled on a uniform lattice over its bounding box (or the
//! fundamental cell for tori). Nodes are classified interior / boundary /
//! excised; boundary nodes are the band within one grid spacing of the
//! analytic boundary and carry Dirichlet data exactly. Excised nodes are
//! either outside the domain or inside a pole core and carry no field value.

use alloc::vec;
use alloc::vec::Vec;

use crate::hermitian::Hermitian;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    /// Unit-type disk in C^1 of the given radius, strongly pseudoconvex.
    Disk { radius: f64 },
    /// Annulus in C^1.
    Annulus { inner: f64, outer: f64 },
    /// Ball in C^2, strongly pseudoconvex.
    Ball { radius: f64 },
    /// Polydisk {|z1| <= r, |z2| <= r} in C^2.
    Polydisk { radius: f64 },
    /// Flat torus, C^1, periodic square cell of the given period.
    Torus1 { period: f64 },
    /// Flat torus, C^2.
    Torus2 { period: f64 },
}

impl DomainKind {
    pub fn complex_dim(&self) -> usize {
        match self {
            DomainKind::Disk { .. } | DomainKind::Annulus { .. } | DomainKind::Torus1 { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, DomainKind::Torus1 { .. } | DomainKind::Torus2 { .. })
    }

    pub fn strongly_pseudoconvex(&self) -> bool {
        matches!(self, DomainKind::Disk { .. } | DomainKind::Ball { .. })
    }

    /// Axis extent of the sampling box.
    pub fn extent(&self) -> f64 {
        match *self {
            DomainKind::Disk { radius } | DomainKind::Ball { radius } | DomainKind::Polydisk { radius } => 2.0 * radius,
            DomainKind::Annulus { outer, .. } => 2.0 * outer,
            DomainKind::Torus1 { period } | DomainKind::Torus2 { period } => period,
        }
    }

    /// Signed distance to the boundary, positive inside. Tori return +inf.
    pub fn boundary_distance(&self, z: &[f64]) -> f64 {
        match *self {
            DomainKind::Disk { radius } => radius - libm::hypot(z[0], z[1]),
            DomainKind::Annulus { inner, outer } => {
                let r = libm::hypot(z[0], z[1]);
                (outer - r).min(r - inner)
            }
            DomainKind::Ball { radius } => {
                radius - libm::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3])
            }
            DomainKind::Polydisk { radius } => {
                let r1 = libm::hypot(z[0], z[1]);
                let r2 = libm::hypot(z[2], z[3]);
                (radius - r1).min(radius - r2)
            }
            DomainKind::Torus1 { .. } | DomainKind::Torus2 { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeMask {
    Interior,
    Boundary,
    /// Pole core or outside the domain; carries no value.
    Excised,
}

#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Grid cells per real axis; spacing h = extent / resolution.
    pub resolution: usize,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, resolution: usize) -> Result<Self, &'static str> {
        if resolution < 16 {
            return Err("resolution must be at least 16");
        }
        match kind {
            DomainKind::Disk { radius } | DomainKind::Ball { radius } | DomainKind::Polydisk { radius } => {
                if radius <= 0.0 {
                    return Err("radius must be positive");
                }
            }
            DomainKind::Annulus { inner, outer } => {
                if inner <= 0.0 || outer <= inner {
                    return Err("annulus needs 0 < inner < outer");
                }
            }
            DomainKind::Torus1 { period } | DomainKind::Torus2 { period } => {
                if period <= 0.0 {
                    return Err("period must be positive");
                }
            }
        }
        Ok(DomainSpec { kind, resolution })
    }

    pub fn complex_dim(&self) -> usize {
        self.kind.complex_dim()
    }

    /// Number of real axes (2n).
    pub fn real_dim(&self) -> usize {
        2 * self.kind.complex_dim()
    }

    pub fn spacing(&self) -> f64 {
        self.kind.extent() / self.resolution as f64
    }

    /// Nodes per real axis. Periodic axes drop the duplicate endpoint.
    pub fn axis_len(&self) -> usize {
        if self.kind.is_periodic() {
            self.resolution
        } else {
            self.resolution + 1
        }
    }

    pub fn node_count(&self) -> usize {
        let mut c = 1usize;
        for _ in 0..self.real_dim() {
            c *= self.axis_len();
        }
        c
    }

    fn origin(&self) -> f64 {
        if self.kind.is_periodic() {
            0.0
        } else {
            -0.5 * self.kind.extent()
        }
    }

    /// Real coordinates of a node given per-axis indices.
    pub fn coords(&self, idx: &[usize]) -> [f64; 4] {
        let h = self.spacing();
        let o = self.origin();
        let mut z = [0.0f64; 4];
        for (a, &i) in idx.iter().enumerate() {
            z[a] = o + i as f64 * h;
        }
        z
    }

    pub fn unflatten(&self, mut flat: usize) -> [usize; 4] {
        let len = self.axis_len();
        let m = self.real_dim();
        let mut idx = [0usize; 4];
        for a in (0..m).rev() {
            idx[a] = flat % len;
            flat /= len;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let len = self.axis_len();
        let mut f = 0usize;
        for &i in idx.iter().take(self.real_dim()) {
            f = f * len + i;
        }
        f
    }

    /// Neighbor at integer offset, wrapping on tori. None if off the lattice.
    pub fn neighbor(&self, flat: usize, off: &[i64]) -> Option<usize> {
        let len = self.axis_len() as i64;
        let idx = self.unflatten(flat);
        let m = self.real_dim();
        let mut out = [0usize; 4];
        for a in 0..m {
            let mut v = idx[a] as i64 + off[a];
            if self.kind.is_periodic() {
                v = v.rem_euclid(len);
            } else if v < 0 || v >= len {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.flatten(&out[..m]))
    }

    /// Classifies a node against the analytic domain (no excision applied).
    pub fn classify(&self, z: &[f64]) -> NodeMask {
        let d = self.kind.boundary_distance(z);
        let h = self.spacing();
        if d < 0.0 {
            NodeMask::Excised
        } else if d < h * (1.0 - 1e-12) {
            NodeMask::Boundary
        } else {
            NodeMask::Interior
        }
    }

    /// Displacement x - p per real axis, shortest representative on tori.
    pub fn displacement(&self, x: &[f64], p: &[f64]) -> [f64; 4] {
        let mut d = [0.0f64; 4];
        let m = self.real_dim();
        for a in 0..m {
            let mut v = x[a] - p[a];
            if let DomainKind::Torus1 { period } | DomainKind::Torus2 { period } = self.kind {
                v -= period * libm::round(v / period);
            }
            d[a] = v;
        }
        d
    }

    pub fn distance(&self, x: &[f64], p: &[f64]) -> f64 {
        let d = self.displacement(x, p);
        let m = self.real_dim();
        libm::sqrt(d[..m].iter().map(|v| v * v).sum())
    }
}

/// Real scalar field sampled on a domain grid.
#[derive(Clone, Debug)]
pub struct ComplexGrid {
    pub domain: DomainSpec,
    pub values: Vec<f64>,
    pub mask: Vec<NodeMask>,
}

impl ComplexGrid {
    /// Grid with all in-domain nodes zero-valued; no excision.
    pub fn zeros(domain: &DomainSpec) -> Self {
        let count = domain.node_count();
        let mut mask = vec![NodeMask::Interior; count];
        for i in 0..count {
            let z = domain.coords(&domain.unflatten(i));
            mask[i] = domain.classify(&z);
        }
        ComplexGrid { domain: domain.clone(), values: vec![0.0; count], mask }
    }

    /// Samples a function of the real coordinates on all non-excised nodes.
    pub fn from_fn(domain: &DomainSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut g = Self::zeros(domain);
        for i in 0..g.values.len() {
            if g.mask[i] != NodeMask::Excised {
                let z = domain.coords(&domain.unflatten(i));
                g.values[i] = f(&z[..domain.real_dim()]);
            }
        }
        g
    }

    /// Evaluates a function on all currently valued nodes (use after
    /// excising pole cores the function cannot be evaluated on).
    pub fn fill(&mut self, f: impl Fn(&[f64]) -> f64) {
        for i in 0..self.values.len() {
            if self.mask[i] != NodeMask::Excised {
                let z = self.domain.coords(&self.domain.unflatten(i));
                self.values[i] = f(&z[..self.domain.real_dim()]);
            }
        }
    }

    /// Marks nodes within `radius` of `center` as excised.
    pub fn excise_ball(&mut self, center: &[f64], radius: f64) {
        for i in 0..self.values.len() {
            if self.mask[i] == NodeMask::Excised {
                continue;
            }
            let z = self.domain.coords(&self.domain.unflatten(i));
            if self.domain.distance(&z[..self.domain.real_dim()], center) < radius {
                self.mask[i] = NodeMask::Excised;
                self.values[i] = f64::NAN;
            }
        }
    }

    pub fn node_coords(&self, flat: usize) -> [f64; 4] {
        self.domain.coords(&self.domain.unflatten(flat))
    }

    pub fn is_valued(&self, flat: usize) -> bool {
        self.mask[flat] != NodeMask::Excised
    }

    /// Multilinear interpolation at an arbitrary point using valued nodes
    /// only; weights over missing corners are renormalized. Returns None when
    /// no corner carries a value.
    pub fn sample(&self, x: &[f64]) -> Option<f64> {
        let d = &self.domain;
        let m = d.real_dim();
        let h = d.spacing();
        let o = d.origin();
        let len = d.axis_len() as i64;
        let mut base = [0i64; 4];
        let mut frac = [0.0f64; 4];
        for a in 0..m {
            let t = (x[a] - o) / h;
            let f = libm::floor(t);
            base[a] = f as i64;
            frac[a] = t - f;
            if !d.kind.is_periodic() {
                if base[a] < -1 || base[a] > len - 1 {
                    return None;
                }
            }
        }
        let corners = 1usize << m;
        let mut wsum = 0.0;
        let mut vsum = 0.0;
        for c in 0..corners {
            let mut w = 1.0;
            let mut idx = [0usize; 4];
            let mut ok = true;
            for a in 0..m {
                let hi = (c >> a) & 1;
                w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
                let mut v = base[a] + hi as i64;
                if d.kind.is_periodic() {
                    v = v.rem_euclid(len);
                } else if v < 0 || v >= len {
                    ok = false;
                    break;
                }
                idx[a] = v as usize;
            }
            if !ok || w == 0.0 {
                continue;
            }
            let flat = d.flatten(&idx[..m]);
            if self.mask[flat] != NodeMask::Excised {
                wsum += w;
                vsum += w * self.values[flat];
            }
        }
        if wsum > 1e-12 {
            Some(vsum / wsum)
        } else {
            None
        }
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(|&i| self.mask[i] == NodeMask::Interior)
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(|&i| self.mask[i] == NodeMask::Boundary)
    }

    /// Max |a - b| over commonly valued nodes.
    pub fn sup_diff(&self, other: &ComplexGrid) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            if self.is_valued(i) && other.is_valued(i) {
                worst = worst.max((self.values[i] - other.values[i]).abs());
            }
        }
        worst
    }
}

/// Per-node n x n Hermitian matrix field, packed row-major.
#[derive(Clone, Debug)]
pub struct HermitianField {
    pub domain: DomainSpec,
    n: usize,
    data: Vec<C64>,
}

impl HermitianField {
    pub fn from_fn(domain: &DomainSpec, f: impl Fn(&[f64]) -> Hermitian) -> Self {
        let n = domain.complex_dim();
        let count = domain.node_count();
        let mut data = vec![C64::new(0.0, 0.0); count * n * n];
        for i in 0..count {
            let z = domain.coords(&domain.unflatten(i));
            let h = f(&z[..domain.real_dim()]);
            debug_assert_eq!(h.n(), n);
            for r in 0..n {
                for c in 0..n {
                    data[(i * n + r) * n + c] = h.get(r, c);
                }
            }
        }
        HermitianField { domain: domain.clone(), n, data }
    }

    pub fn zeros(domain: &DomainSpec) -> Self {
        Self::from_fn(domain, |_| Hermitian::zeros(domain.complex_dim()))
    }

    pub fn at(&self, flat: usize) -> Hermitian {
        let n = self.n;
        let mut m = Hermitian::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, self.data[(flat * n + r) * n + c]);
            }
        }
        m
    }

    /// Largest Hermitian-asymmetry over the field, relative to entry scale.
    pub fn max_relative_asymmetry(&self) -> f64 {
        let count = self.domain.node_count();
        let mut worst = 0.0f64;
        for i in 0..count {
            let m = self.at(i);
            let scale: f64 = (0..self.n)
                .flat_map(|r| (0..self.n).map(move |c| (r, c)))
                .map(|(r, c)| m.get(r, c).norm())
                .fold(0.0, f64::max);
            if scale > 0.0 {
                worst = worst.max(m.asymmetry() / scale);
            }
        }
        worst
    }
}
