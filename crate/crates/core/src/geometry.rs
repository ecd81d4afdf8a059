//! Rotation algebra, antenna placement and pose feasibility.
//!
//! Conventions: the global frame has its origin at the base-station reference
//! point (the CPU). A surface pose is a centre position `q` and three rotation
//! angles `u = (alpha, beta, gamma)` about the x, y and z axes. Antenna offsets
//! and the surface normal are expressed in the surface's local frame and mapped
//! to the global frame by `q + R(u) r`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{wrap_two_pi, Scalar};

/// Absolute slack (metres, or unit dot products) under which a constraint
/// value is treated as satisfied. Keeps boundary configurations such as
/// coplanar surfaces feasible despite rounding.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// A point in the global (or local) Cartesian frame, in metres.
pub type Position3<T> = Vec3<T>;

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Vec3<U> {
        Vec3::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()), U::lit(self.z.as_f64()))
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Real 3×3 matrix stored by rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Scalar> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self { rows: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    /// `Rᵀ v`, i.e. the inverse rotation for orthonormal `R`.
    #[inline]
    pub fn mul_vec_transposed(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[1][0] * v.y + r[2][0] * v.z,
            r[0][1] * v.x + r[1][1] * v.y + r[2][1] * v.z,
            r[0][2] * v.x + r[1][2] * v.y + r[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self { rows: [[r[0][0], r[1][0], r[2][0]], [r[0][1], r[1][1], r[2][1]], [r[0][2], r[1][2], r[2][2]]] }
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut rows = [[T::zero(); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).fold(T::zero(), |acc, k| acc + self.rows[i][k] * o.rows[k][j]);
            }
        }
        Self { rows }
    }

    pub fn determinant(&self) -> T {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    pub fn frobenius_distance(&self, o: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let d = self.rows[i][j] - o.rows[i][j];
                acc = acc + d * d;
            }
        }
        acc.sqrt()
    }
}

/// Rotation angles about the x, y and z axes, each stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationAngles<T> {
    alpha: T,
    beta: T,
    gamma: T,
}

impl<T: Scalar> RotationAngles<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Self {
        Self { alpha: wrap_two_pi(alpha), beta: wrap_two_pi(beta), gamma: wrap_two_pi(gamma) }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn to_array(self) -> [T; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Component-wise offset (result re-normalized).
    pub fn offset(self, d: [T; 3]) -> Self {
        Self::new(self.alpha + d[0], self.beta + d[1], self.gamma + d[2])
    }

    /// Rotation whose first local axis `(1,0,0)` maps onto `direction`, with
    /// `spin` as the x-axis angle. `direction` need not be normalized.
    pub fn facing(direction: Vec3<T>, spin: T) -> Self {
        let d = direction.normalized().unwrap_or(Vec3::new(T::one(), T::zero(), T::zero()));
        let (sa, ca) = spin.sin_cos();
        // Columns 2..3 of R e1 are an orthogonal mix of (sin β cos γ, sin γ).
        let v1 = sa * d.y + ca * d.z;
        let v2 = -ca * d.y + sa * d.z;
        let gamma = v2.max(-T::one()).min(T::one()).asin();
        let beta = v1.atan2(d.x);
        Self::new(spin, beta, gamma)
    }
}

impl<T: Scalar> RotationAngles<T> {
    /// Angles reproducing a proper rotation matrix through [`rotation_matrix`].
    /// At gimbal lock (`cos β = 0`) α is set to 0.
    pub fn from_matrix(r: &Mat3<T>) -> Self {
        let m = &r.rows;
        let sb = (-m[0][2]).max(-T::one()).min(T::one());
        let beta = sb.asin();
        if beta.cos() > T::lit(1e-9) {
            let alpha = m[1][2].atan2(m[2][2]);
            let gamma = m[0][1].atan2(m[0][0]);
            Self::new(alpha, beta, gamma)
        } else if sb > T::zero() {
            // row 2 = [sin(α−γ), cos(α−γ), 0]
            Self::new(T::zero(), beta, -m[1][0].atan2(m[1][1]))
        } else {
            // row 2 = [−sin(α+γ), cos(α+γ), 0]
            Self::new(T::zero(), beta, (-m[1][0]).atan2(m[1][1]))
        }
    }
}

/// Rotation by angle `|w|` about axis `w/|w|` (Rodrigues).
pub fn axis_angle_matrix<T: Scalar>(w: Vec3<T>) -> Mat3<T> {
    let theta = w.norm();
    if theta == T::zero() {
        return Mat3::identity();
    }
    let k = w.scale(T::one() / theta);
    let (s, c) = theta.sin_cos();
    let v = T::one() - c;
    Mat3 {
        rows: [
            [c + k.x * k.x * v, k.x * k.y * v - k.z * s, k.x * k.z * v + k.y * s],
            [k.y * k.x * v + k.z * s, c + k.y * k.y * v, k.y * k.z * v - k.x * s],
            [k.z * k.x * v - k.y * s, k.z * k.y * v + k.x * s, c + k.z * k.z * v],
        ],
    }
}

/// A surface's six-parameter pose: centre position and rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfacePose<T> {
    pub position: Position3<T>,
    pub rotation: RotationAngles<T>,
}

impl<T: Scalar> SurfacePose<T> {
    pub fn new(position: Position3<T>, rotation: RotationAngles<T>) -> Self {
        Self { position, rotation }
    }

    /// Pose at `position` whose local x-axis points along `direction`.
    pub fn facing(position: Position3<T>, direction: Vec3<T>) -> Self {
        Self::new(position, RotationAngles::facing(direction, T::zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
    }
}

/// Antenna layout of one surface in its local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalArray<T> {
    offsets: Vec<Position3<T>>,
    normal: Vec3<T>,
}

impl<T: Scalar> LocalArray<T> {
    pub fn new(offsets: Vec<Position3<T>>, normal: Vec3<T>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::invalid("array offsets", "at least one antenna required"));
        }
        if offsets.iter().any(|o| !o.is_finite()) {
            return Err(Error::NonFinite("array offsets"));
        }
        let dev = (normal.norm() - T::one()).abs();
        if !(dev <= T::lit(1e-12)) {
            return Err(Error::invalid("array normal", format!("must have unit norm (|n| - 1 = {dev})")));
        }
        Ok(Self { offsets, normal })
    }

    /// Single antenna at the surface centre, normal along local +x.
    pub fn single() -> Self {
        Self { offsets: vec![Vec3::zero()], normal: Vec3::new(T::one(), T::zero(), T::zero()) }
    }

    /// `n_h × n_v` planar array in the local y–z plane, centred on the origin,
    /// facing local +x (the directive pattern's boresight).
    pub fn upa(n_h: usize, n_v: usize, spacing: T) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::invalid("array size", "grid dimensions must be positive"));
        }
        let ch = T::lit((n_h as f64 - 1.0) / 2.0);
        let cv = T::lit((n_v as f64 - 1.0) / 2.0);
        let mut offsets = Vec::with_capacity(n_h * n_v);
        for iv in 0..n_v {
            for ih in 0..n_h {
                offsets.push(Vec3::new(
                    T::zero(),
                    (T::lit(ih as f64) - ch) * spacing,
                    (T::lit(iv as f64) - cv) * spacing,
                ));
            }
        }
        Self::new(offsets, Vec3::new(T::one(), T::zero(), T::zero()))
    }

    /// Linear array along the local y-axis with centred offsets
    /// `d_n = (n-1)·spacing − (N-1)·spacing/2`.
    pub fn ula(n: usize, spacing: T) -> Result<Self> {
        Self::upa(n, 1, spacing)
    }

    pub fn offsets(&self) -> &[Position3<T>] {
        &self.offsets
    }

    pub fn normal(&self) -> Vec3<T> {
        self.normal
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Convex site region in which surface centres may be placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteRegion<T> {
    Sphere { center: Position3<T>, radius: T },
    Box { min: Position3<T>, max: Position3<T> },
}

impl<T: Scalar> SiteRegion<T> {
    pub fn sphere(center: Position3<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !center.is_finite() || !radius.is_finite() {
            return Err(Error::invalid("region radius", "must be positive and finite"));
        }
        Ok(Self::Sphere { center, radius })
    }

    pub fn aabb(min: Position3<T>, max: Position3<T>) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(Error::invalid("region box", "min must be < max componentwise"));
        }
        Ok(Self::Box { min, max })
    }

    pub fn contains(&self, q: Position3<T>) -> bool {
        let slack = T::lit(FEASIBILITY_SLACK);
        match *self {
            SiteRegion::Sphere { center, radius } => q.distance(center) <= radius + slack,
            SiteRegion::Box { min, max } => {
                q.x >= min.x - slack
                    && q.y >= min.y - slack
                    && q.z >= min.z - slack
                    && q.x <= max.x + slack
                    && q.y <= max.y + slack
                    && q.z <= max.z + slack
            }
        }
    }

    /// Euclidean projection onto the region.
    pub fn project(&self, q: Position3<T>) -> Position3<T> {
        match *self {
            SiteRegion::Sphere { center, radius } => {
                let d = q - center;
                let n = d.norm();
                if n <= radius {
                    q
                } else {
                    center + d.scale(radius / n)
                }
            }
            SiteRegion::Box { min, max } => {
                Vec3::new(q.x.max(min.x).min(max.x), q.y.max(min.y).min(max.y), q.z.max(min.z).min(max.z))
            }
        }
    }
}

/// Minimum centre-to-centre distance between surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintConfig<T> {
    d_min: T,
}

impl<T: Scalar> ConstraintConfig<T> {
    pub fn new(d_min: T) -> Result<Self> {
        if !(d_min > T::zero()) || !d_min.is_finite() {
            return Err(Error::invalid("d_min", "must be > 0"));
        }
        Ok(Self { d_min })
    }

    pub fn d_min(&self) -> T {
        self.d_min
    }
}

/// Finite candidate set of positions, each with its own rotation options.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGrid<T> {
    positions: Vec<Position3<T>>,
    rotations: Vec<Vec<RotationAngles<T>>>,
}

impl<T: Scalar> DiscreteGrid<T> {
    pub fn new(positions: Vec<Position3<T>>, rotations: Vec<Vec<RotationAngles<T>>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("grid positions", "M must be ≥ 1"));
        }
        if rotations.len() != positions.len() {
            return Err(Error::Dimension(format!(
                "{} positions but {} rotation lists",
                positions.len(),
                rotations.len()
            )));
        }
        if let Some(m) = rotations.iter().position(|r| r.is_empty()) {
            return Err(Error::invalid("grid rotations", format!("position {m} has no rotation")));
        }
        Ok(Self { positions, rotations })
    }

    pub fn positions(&self) -> &[Position3<T>] {
        &self.positions
    }

    pub fn rotations(&self, m: usize) -> &[RotationAngles<T>] {
        &self.rotations[m]
    }

    pub fn num_positions(&self) -> usize {
        self.positions.len()
    }

    /// Largest rotation-list length (`L_d`).
    pub fn max_rotations(&self) -> usize {
        self.rotations.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn pose(&self, m: usize, l: usize) -> SurfacePose<T> {
        SurfacePose::new(self.positions[m], self.rotations[m][l])
    }
}

/// Rotation matrix `R(u)`.
pub fn rotation_matrix<T: Scalar>(u: RotationAngles<T>) -> Mat3<T> {
    let (sa, ca) = u.alpha.sin_cos();
    let (sb, cb) = u.beta.sin_cos();
    let (sg, cg) = u.gamma.sin_cos();
    Mat3 {
        rows: [
            [cb * cg, cb * sg, -sb],
            [sb * sa * cg - ca * sg, sb * sa * sg + ca * cg, cb * sa],
            [ca * sb * cg + sa * sg, ca * sb * sg - sa * cg, ca * cb],
        ],
    }
}

/// Partial derivatives `∂R/∂α, ∂R/∂β, ∂R/∂γ`.
pub fn rotation_matrix_partials<T: Scalar>(u: RotationAngles<T>) -> [Mat3<T>; 3] {
    let (sa, ca) = u.alpha.sin_cos();
    let (sb, cb) = u.beta.sin_cos();
    let (sg, cg) = u.gamma.sin_cos();
    let z = T::zero();
    let d_alpha = Mat3 {
        rows: [
            [z, z, z],
            [sb * ca * cg + sa * sg, sb * ca * sg - sa * cg, cb * ca],
            [-sa * sb * cg + ca * sg, -sa * sb * sg - ca * cg, -sa * cb],
        ],
    };
    let d_beta = Mat3 {
        rows: [
            [-sb * cg, -sb * sg, -cb],
            [cb * sa * cg, cb * sa * sg, -sb * sa],
            [ca * cb * cg, ca * cb * sg, -ca * sb],
        ],
    };
    let d_gamma = Mat3 {
        rows: [
            [-cb * sg, cb * cg, z],
            [-sb * sa * sg - ca * cg, sb * sa * cg - ca * sg, z],
            [-ca * sb * sg + sa * cg, ca * sb * cg + sa * sg, z],
        ],
    };
    [d_alpha, d_beta, d_gamma]
}

/// Global antenna positions `r_n = q + R(u) r̄_n`, in offset order.
pub fn global_antenna_positions<T: Scalar>(pose: &SurfacePose<T>, array: &LocalArray<T>) -> Vec<Position3<T>> {
    let r = rotation_matrix(pose.rotation);
    array.offsets.iter().map(|&o| pose.position + r.mul_vec(o)).collect()
}

/// Outward normal `n(u) = R(u) n̄`.
pub fn surface_normal<T: Scalar>(u: RotationAngles<T>, array: &LocalArray<T>) -> Vec3<T> {
    rotation_matrix(u).mul_vec(array.normal)
}

/// Pointing vector `[cosθ cosφ, cosθ sinφ, sinθ]` for elevation `theta`
/// in `[-π/2, π/2]` and azimuth `phi` in `[-π, π]`.
pub fn pointing_vector<T: Scalar>(theta: T, phi: T) -> Result<Vec3<T>> {
    let eps = T::lit(1e-12);
    if !(theta.abs() <= T::FRAC_PI_2() + eps) {
        return Err(Error::invalid("elevation", format!("{theta} outside [-π/2, π/2]")));
    }
    if !(phi.abs() <= T::PI() + eps) {
        return Err(Error::invalid("azimuth", format!("{phi} outside [-π, π]")));
    }
    Ok(pointing_vector_unchecked(theta, phi))
}

#[inline]
pub(crate) fn pointing_vector_unchecked<T: Scalar>(theta: T, phi: T) -> Vec3<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(ct * cp, ct * sp, st)
}

/// Splits a unit vector into `(elevation, azimuth)`; azimuth is 0 at the poles.
pub fn spherical_angles<T: Scalar>(v: Vec3<T>) -> (T, T) {
    let sz = v.z.max(-T::one()).min(T::one());
    let theta = sz.asin();
    if theta.cos() < T::lit(1e-12) {
        (theta, T::zero())
    } else {
        (theta, v.y.atan2(v.x))
    }
}

/// Local-frame direction `(θ̃, φ̃)` of the global unit vector `f`, seen from a
/// surface with rotation `u`.
pub fn local_frame_direction<T: Scalar>(u: RotationAngles<T>, f: Vec3<T>) -> (T, T) {
    spherical_angles(rotation_matrix(u).mul_vec_transposed(f))
}

/// All unordered pairs `(b, j)`, `b < j`, closer than `d_min`.
pub fn check_min_distance<T: Scalar>(poses: &[SurfacePose<T>], cfg: &ConstraintConfig<T>) -> Vec<(usize, usize)> {
    let limit = cfg.d_min - T::lit(FEASIBILITY_SLACK);
    let mut out = Vec::new();
    for b in 0..poses.len() {
        for j in b + 1..poses.len() {
            if poses[b].position.distance(poses[j].position) < limit {
                out.push((b, j));
            }
        }
    }
    out
}

fn array_for<T>(arrays: &[LocalArray<T>], b: usize) -> &LocalArray<T> {
    if arrays.len() == 1 {
        &arrays[0]
    } else {
        &arrays[b]
    }
}

/// Ordered pairs `(b, j)` where surface `b` faces surface `j`:
/// `n(u_b)ᵀ (q_j − q_b) > 0`.
///
/// `arrays` holds either one array per pose or a single array shared by all.
pub fn check_no_reflection<T: Scalar>(poses: &[SurfacePose<T>], arrays: &[LocalArray<T>]) -> Vec<(usize, usize)> {
    assert!(arrays.len() == 1 || arrays.len() == poses.len(), "arrays must be shared or aligned with poses");
    let slack = T::lit(FEASIBILITY_SLACK);
    let mut out = Vec::new();
    for (b, pb) in poses.iter().enumerate() {
        let n = surface_normal(pb.rotation, array_for(arrays, b));
        for (j, pj) in poses.iter().enumerate() {
            if j != b && n.dot(pj.position - pb.position) > slack {
                out.push((b, j));
            }
        }
    }
    out
}

/// Surfaces whose normal points back toward the CPU: `n(u_b)ᵀ q_b < 0`.
pub fn check_no_blockage<T: Scalar>(poses: &[SurfacePose<T>], arrays: &[LocalArray<T>]) -> Vec<usize> {
    assert!(arrays.len() == 1 || arrays.len() == poses.len(), "arrays must be shared or aligned with poses");
    let slack = T::lit(FEASIBILITY_SLACK);
    poses
        .iter()
        .enumerate()
        .filter(|(b, p)| surface_normal(p.rotation, array_for(arrays, *b)).dot(p.position) < -slack)
        .map(|(b, _)| b)
        .collect()
}

/// Euclidean projection of `q` onto `region`.
pub fn project_into_region<T: Scalar>(q: Position3<T>, region: &SiteRegion<T>) -> Position3<T> {
    region.project(q)
}

/// Outcome of running every pose constraint at once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub min_distance: Vec<(usize, usize)>,
    pub reflection: Vec<(usize, usize)>,
    pub blockage: Vec<usize>,
    pub outside_region: Vec<usize>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.min_distance.is_empty()
            && self.reflection.is_empty()
            && self.blockage.is_empty()
            && self.outside_region.is_empty()
    }

    /// Human-readable name of the first violated constraint, if any.
    pub fn first_violation(&self) -> Option<String> {
        if let Some((b, j)) = self.min_distance.first() {
            return Some(format!("minimum distance between surfaces {b} and {j}"));
        }
        if let Some((b, j)) = self.reflection.first() {
            return Some(format!("reflection: surface {b} faces surface {j}"));
        }
        if let Some(b) = self.blockage.first() {
            return Some(format!("blockage: surface {b} faces the CPU"));
        }
        self.outside_region.first().map(|b| format!("surface {b} outside the site region"))
    }
}

/// Runs the distance, reflection, blockage and region checks together.
pub fn check_all<T: Scalar>(
    poses: &[SurfacePose<T>],
    arrays: &[LocalArray<T>],
    cfg: &ConstraintConfig<T>,
    region: &SiteRegion<T>,
) -> FeasibilityReport {
    FeasibilityReport {
        min_distance: check_min_distance(poses, cfg),
        reflection: check_no_reflection(poses, arrays),
        blockage: check_no_blockage(poses, arrays),
        outside_region: poses
            .iter()
            .enumerate()
            .filter(|(_, p)| !region.contains(p.position))
            .map(|(b, _)| b)
            .collect(),
    }
}

/// `count` quasi-uniform unit vectors (Fibonacci lattice). With `upper_only`
/// the lattice covers the hemisphere `z ≥ 0` instead of the full sphere.
pub fn fibonacci_sphere<T: Scalar>(count: usize, upper_only: bool) -> Vec<Vec3<T>> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|i| {
            let frac = (i as f64 + 0.5) / count as f64;
            let z = if upper_only { 1.0 - frac } else { 1.0 - 2.0 * frac };
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64;
            Vec3::new(T::lit(r * a.cos()), T::lit(r * a.sin()), T::lit(z))
        })
        .collect()
}
