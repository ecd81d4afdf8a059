//! Channel synthesis: the basic multipath surface model, its polarized,
//! rotatable-ULA and positionable specializations, and directional sparsity.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{
    global_antenna_positions, local_frame_direction, pointing_vector, rotation_matrix, LocalArray, Position3,
    RotationAngles, SurfacePose, Vec3,
};
use crate::linalg::CMatrix;
use crate::scalar::Scalar;

/// One propagation path: complex gain and global arrival direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent<T> {
    pub gain: Complex<T>,
    /// Elevation in `[-π/2, π/2]`.
    pub theta: T,
    /// Azimuth in `[-π, π]`.
    pub phi: T,
}

impl<T: Scalar> PathComponent<T> {
    pub fn new(gain: Complex<T>, theta: T, phi: T) -> Result<Self> {
        if !(gain.re.is_finite() && gain.im.is_finite()) {
            return Err(Error::NonFinite("path gain"));
        }
        pointing_vector(theta, phi)?;
        Ok(Self { gain, theta, phi })
    }

    /// Unit pointing vector of the path direction.
    pub fn direction(&self) -> Vec3<T> {
        crate::geometry::pointing_vector_unchecked(self.theta, self.phi)
    }
}

/// Multipath description of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannelSpec<T> {
    paths: Vec<PathComponent<T>>,
}

impl<T: Scalar> UserChannelSpec<T> {
    pub fn new(paths: Vec<PathComponent<T>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("user paths", "at least one path required"));
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathComponent<T>] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }
}

/// Element gain pattern. Directive constants are in dB / degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntennaPattern<T> {
    Isotropic,
    Directive { g_max_dbi: T, theta_3db_deg: T, phi_3db_deg: T, g_s_db: T, g_v_db: T },
}

impl<T: Scalar> AntennaPattern<T> {
    /// The 3GPP sector element: 8 dBi peak, 25° beamwidths, 25 dB floors.
    pub fn three_gpp() -> Self {
        Self::Directive {
            g_max_dbi: T::lit(8.0),
            theta_3db_deg: T::lit(25.0),
            phi_3db_deg: T::lit(25.0),
            g_s_db: T::lit(25.0),
            g_v_db: T::lit(25.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AntennaPattern::Directive { g_max_dbi, theta_3db_deg, phi_3db_deg, g_s_db, g_v_db } = *self {
            if !g_max_dbi.is_finite() {
                return Err(Error::invalid("pattern g_max_dbi", "must be finite"));
            }
            for (name, v) in [
                ("pattern theta_3db", theta_3db_deg),
                ("pattern phi_3db", phi_3db_deg),
                ("pattern g_s", g_s_db),
                ("pattern g_v", g_v_db),
            ] {
                if !(v > T::zero()) || !v.is_finite() {
                    return Err(Error::invalid(name, format!("must be > 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn peak_gain_linear(&self) -> T {
        match *self {
            AntennaPattern::Isotropic => T::one(),
            AntennaPattern::Directive { g_max_dbi, .. } => dbi_to_linear(g_max_dbi),
        }
    }
}

/// Wavelength and power levels, all SI (metres, watts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    wavelength: T,
    tx_power: T,
    noise_power: T,
}

impl<T: Scalar> LinkBudget<T> {
    pub fn new(wavelength: T, tx_power: T, noise_power: T) -> Result<Self> {
        for (name, v) in [("wavelength", wavelength), ("tx_power", tx_power), ("noise_power", noise_power)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(Self { wavelength, tx_power, noise_power })
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn tx_power(&self) -> T {
        self.tx_power
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    /// Per-user transmit SNR `p / σ²`.
    pub fn snr(&self) -> T {
        self.tx_power / self.noise_power
    }

    pub fn with_tx_power(self, tx_power: T) -> Result<Self> {
        Self::new(self.wavelength, tx_power, self.noise_power)
    }

    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }
}

/// Channel from all users (columns) to all antennas of all surfaces (rows,
/// surface-major then antenna).
pub type ChannelMatrix<T> = CMatrix<T>;

pub fn dbi_to_linear<T: Scalar>(dbi: T) -> T {
    T::lit(10.0).powf(dbi / T::lit(10.0))
}

pub fn linear_to_db<T: Scalar>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// Effective element gain in dBi at local direction `(θ̃, φ̃)` (radians).
pub fn effective_gain_dbi<T: Scalar>(pattern: &AntennaPattern<T>, theta_local: T, phi_local: T) -> T {
    match *pattern {
        AntennaPattern::Isotropic => T::zero(),
        AntennaPattern::Directive { g_max_dbi, theta_3db_deg, phi_3db_deg, g_s_db, g_v_db } => {
            let twelve = T::lit(12.0);
            let t = theta_local.to_degrees() / theta_3db_deg;
            let p = phi_local.to_degrees() / phi_3db_deg;
            let a_h = -(twelve * p * p).min(g_s_db);
            let a_v = -(twelve * t * t).min(g_v_db);
            g_max_dbi - (-(a_h + a_v)).min(g_s_db)
        }
    }
}

/// Linear effective gain `10^{A/10}`.
pub fn effective_gain_linear<T: Scalar>(pattern: &AntennaPattern<T>, theta_local: T, phi_local: T) -> T {
    match pattern {
        AntennaPattern::Isotropic => T::one(),
        _ => dbi_to_linear(effective_gain_dbi(pattern, theta_local, phi_local)),
    }
}

/// Linear gain `g(u, f)` of a surface with rotation `u` towards global direction `f`.
pub fn directional_gain<T: Scalar>(pattern: &AntennaPattern<T>, rotation: RotationAngles<T>, f: Vec3<T>) -> T {
    match pattern {
        AntennaPattern::Isotropic => T::one(),
        _ => {
            let (t, p) = crate::geometry::spherical_angles(rotation_matrix(rotation).mul_vec_transposed(f));
            effective_gain_linear(pattern, t, p)
        }
    }
}

/// Partial derivatives `(∂A/∂θ̃, ∂A/∂φ̃)` of the dBi gain, per radian. Zero on
/// clipped plateaus.
pub(crate) fn effective_gain_dbi_partials<T: Scalar>(
    pattern: &AntennaPattern<T>,
    theta_local: T,
    phi_local: T,
) -> (T, T) {
    match *pattern {
        AntennaPattern::Isotropic => (T::zero(), T::zero()),
        AntennaPattern::Directive { theta_3db_deg, phi_3db_deg, g_s_db, g_v_db, .. } => {
            let twelve = T::lit(12.0);
            let deg = T::lit(180.0) / T::PI();
            let t = theta_local.to_degrees() / theta_3db_deg;
            let p = phi_local.to_degrees() / phi_3db_deg;
            let s_h = twelve * p * p;
            let s_v = twelve * t * t;
            let total = s_h.min(g_s_db) + s_v.min(g_v_db);
            if total >= g_s_db {
                return (T::zero(), T::zero());
            }
            let two = T::lit(2.0);
            let d_t = if s_v < g_v_db { -twelve * two * t / theta_3db_deg * deg } else { T::zero() };
            let d_p = if s_h < g_s_db { -twelve * two * p / phi_3db_deg * deg } else { T::zero() };
            (d_t, d_p)
        }
    }
}

#[inline]
fn unit_phase<T: Scalar>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

/// Steering vector: entry `n` is `exp(−j 2π/λ fᵀ r_n)`.
pub fn steering_vector<T: Scalar>(
    pose: &SurfacePose<T>,
    array: &LocalArray<T>,
    f: Vec3<T>,
    budget: &LinkBudget<T>,
) -> Vec<Complex<T>> {
    let k = budget.wavenumber();
    global_antenna_positions(pose, array).into_iter().map(|r| unit_phase(-k * f.dot(r))).collect()
}

/// Per-surface channel `h = Σ_l η_l √g_l a_l`.
pub fn surface_channel<T: Scalar>(
    pose: &SurfacePose<T>,
    array: &LocalArray<T>,
    pattern: &AntennaPattern<T>,
    user: &UserChannelSpec<T>,
    budget: &LinkBudget<T>,
) -> Vec<Complex<T>> {
    let mut h = vec![Complex::zero(); array.len()];
    accumulate_surface_channel(pose, array, pattern, user.paths(), budget, &mut h);
    h
}

/// Adds the contribution of `paths` to `out` (length N) for one surface.
pub(crate) fn accumulate_surface_channel<T: Scalar>(
    pose: &SurfacePose<T>,
    array: &LocalArray<T>,
    pattern: &AntennaPattern<T>,
    paths: &[PathComponent<T>],
    budget: &LinkBudget<T>,
    out: &mut [Complex<T>],
) {
    let r = rotation_matrix(pose.rotation);
    let k = budget.wavenumber();
    let antennas: Vec<Position3<T>> = array.offsets().iter().map(|&o| pose.position + r.mul_vec(o)).collect();
    for path in paths {
        let f = path.direction();
        let amp = match pattern {
            AntennaPattern::Isotropic => T::one(),
            _ => {
                let (t, p) = crate::geometry::spherical_angles(r.mul_vec_transposed(f));
                effective_gain_linear(pattern, t, p).sqrt()
            }
        };
        let c = path.gain.scale(amp);
        for (o, ant) in out.iter_mut().zip(&antennas) {
            *o = *o + c * unit_phase(-k * f.dot(*ant));
        }
    }
}

/// Stacks per-surface channels into the `N·B × K` channel matrix.
///
/// `arrays` holds either one array per pose or a single array shared by all;
/// every array must have the same antenna count.
pub fn assemble_channel_matrix<T: Scalar>(
    poses: &[SurfacePose<T>],
    arrays: &[LocalArray<T>],
    pattern: &AntennaPattern<T>,
    users: &[UserChannelSpec<T>],
    budget: &LinkBudget<T>,
) -> Result<ChannelMatrix<T>> {
    if arrays.is_empty() || (arrays.len() != 1 && arrays.len() != poses.len()) {
        return Err(Error::Dimension(format!("{} arrays for {} poses", arrays.len(), poses.len())));
    }
    let n = arrays[0].len();
    if arrays.iter().any(|a| a.len() != n) {
        return Err(Error::Dimension("surfaces with unequal antenna counts".into()));
    }
    let mut h = CMatrix::zeros(n * poses.len(), users.len());
    for (k, user) in users.iter().enumerate() {
        let col = h.column_mut(k);
        for (b, pose) in poses.iter().enumerate() {
            let arr = if arrays.len() == 1 { &arrays[0] } else { &arrays[b] };
            accumulate_surface_channel(pose, arr, pattern, user.paths(), budget, &mut col[b * n..(b + 1) * n]);
        }
    }
    Ok(h)
}

/// Single-antenna-per-position channel `h_k(q) = G_k(q)ᴴ τ_k`; entry `b` is
/// `Σ_l τ_l exp(−j 2π/λ f_lᵀ q_b)`.
///
/// The phase sign matches [`surface_channel`] so that both models agree for
/// isotropic single-antenna surfaces.
pub fn positionable_channel<T: Scalar>(
    antenna_positions: &[Position3<T>],
    user: &UserChannelSpec<T>,
    budget: &LinkBudget<T>,
) -> Vec<Complex<T>> {
    let k = budget.wavenumber();
    antenna_positions
        .iter()
        .map(|&q| {
            user.paths().iter().fold(Complex::zero(), |acc, p| {
                // conj(e^{+j k fᵀq}) written out as e^{−j k fᵀq}
                acc + p.gain * unit_phase(-k * p.direction().dot(q))
            })
        })
        .collect()
}

/// Path of the one-dimensional rotatable model: reference spatial angle and gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPath<T> {
    pub angle: T,
    pub gain: Complex<T>,
}

/// Steering vector of an `m`-element centred ULA with element spacing
/// `spacing_wl` (in wavelengths) at spatial angle `angle`:
/// entry `n` is `exp(j 2π d_n/λ sin angle)`.
pub fn ula_steering<T: Scalar>(m: usize, spacing_wl: T, angle: T) -> Vec<Complex<T>> {
    let half = T::lit((m as f64 - 1.0) / 2.0);
    let s = angle.sin();
    (0..m)
        .map(|n| {
            let d = (T::lit(n as f64) - half) * spacing_wl;
            unit_phase(T::TAU() * d * s)
        })
        .collect()
}

/// Channel of a half-wavelength ULA rotated by `gamma`:
/// `h(γ) = Σ_ℓ ξ_ℓ a(γ̄_ℓ + γ)`.
pub fn rotatable_channel_1d<T: Scalar>(gamma: T, paths: &[SpatialPath<T>], m: usize) -> Vec<Complex<T>> {
    let mut h = vec![Complex::zero(); m];
    for p in paths {
        for (o, a) in h.iter_mut().zip(ula_steering(m, T::lit(0.5), p.angle + gamma)) {
            *o = *o + p.gain * a;
        }
    }
    h
}

/// Dual-polarized response `A = Q P` between a surface with rotation `u_b`
/// and a user antenna frame `u_k_r` for a LoS path at `(θ, φ)`. Row/column
/// order is (vertical, horizontal).
pub fn polarization_response<T: Scalar>(
    u_b: RotationAngles<T>,
    u_k_r: RotationAngles<T>,
    theta: T,
    phi: T,
) -> [[T; 2]; 2] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let z = Vec3::new(st * sp, -ct, st * cp);
    let z_bar = Vec3::new(cp, T::zero(), -sp);
    let e_v = Vec3::new(T::zero(), T::one(), T::zero());
    let e_h = Vec3::new(T::one(), T::zero(), T::zero());
    let rb = rotation_matrix(u_b);
    let rk = rotation_matrix(u_k_r);
    let (bv, bh) = (rb.mul_vec(e_v), rb.mul_vec(e_h));
    let (kv, kh) = (rk.mul_vec(e_v), rk.mul_vec(e_h));
    let p = [[bv.dot(z), bh.dot(z)], [bv.dot(z_bar), bh.dot(z_bar)]];
    let q = [[z.dot(kv), z_bar.dot(kv)], [z.dot(kh), z_bar.dot(kh)]];
    let mut a = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] = q[i][0] * p[0][j] + q[i][1] * p[1][j];
        }
    }
    a
}

/// Polarized LoS channel `h^{los} ⊗ A` as a `2N × 2` matrix.
pub fn polarized_channel<T: Scalar>(
    pose: &SurfacePose<T>,
    array: &LocalArray<T>,
    pattern: &AntennaPattern<T>,
    user: &UserChannelSpec<T>,
    user_rotation: RotationAngles<T>,
    budget: &LinkBudget<T>,
) -> Result<CMatrix<T>> {
    if user.num_paths() != 1 {
        return Err(Error::invalid(
            "polarized user",
            format!("LoS-only model needs exactly one path, got {}", user.num_paths()),
        ));
    }
    let path = user.paths()[0];
    let h = surface_channel(pose, array, pattern, user, budget);
    let a = polarization_response(pose.rotation, user_rotation, path.theta, path.phi);
    Ok(CMatrix::from_fn(2 * h.len(), 2, |r, c| h[r / 2].scale(a[r % 2][c])))
}

/// Indicator `Z[m][k]`: whether any path of user `k` sees gain above
/// `gain_threshold_linear` at pose `m`.
pub fn directional_sparsity<T: Scalar>(
    pattern: &AntennaPattern<T>,
    poses: &[SurfacePose<T>],
    users: &[UserChannelSpec<T>],
    gain_threshold_linear: T,
) -> Vec<Vec<bool>> {
    poses
        .iter()
        .map(|pose| {
            users
                .iter()
                .map(|u| {
                    u.paths().iter().any(|p| {
                        let (t, ph) = local_frame_direction(pose.rotation, p.direction());
                        effective_gain_linear(pattern, t, ph) > gain_threshold_linear
                    })
                })
                .collect()
        })
        .collect()
}
