//! Longitudinal kinematics and the Intelligent Driver Model.

use super::ModelParams;

/// Pre-saturation output of the IDM when the gap to the leader has
/// closed completely; the transition clamps it to the maximum
/// deceleration.
pub const COLLISION_IMMINENT_ACCEL: f64 = -1e6;

/// Constant-acceleration step with the stop rule: if the velocity
/// would turn negative within `dt`, the vehicle stops at the position
/// given by `v^2 / (2 |a|)` instead.
pub fn kinematic_step(l: f64, v: f64, a: f64, dt: f64) -> (f64, f64) {
    debug_assert!(v >= 0.0, "negative velocities are not representable");
    debug_assert!(dt > 0.0);
    let v_next = v + a * dt;
    if v_next >= 0.0 {
        (l + v * dt + 0.5 * a * dt * dt, v_next)
    } else {
        (l + v * v / (2.0 * a.abs()), 0.0)
    }
}

/// A leader as seen by the IDM: bumper-to-bumper gap and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    pub gap: f64,
    pub velocity: f64,
}

/// IDM acceleration: a free-driving term relaxing the speed toward
/// `v_desired` plus an interaction term avoiding the leader. Saturation
/// and behavior noise are applied by the transition, not here.
///
/// A non-positive gap signals an already-closed following distance and
/// yields [`COLLISION_IMMINENT_ACCEL`].
pub fn idm_acceleration(
    v: f64,
    v_desired: f64,
    leader: Option<Leader>,
    params: &ModelParams,
) -> f64 {
    debug_assert!(v_desired > 0.0, "desired speed must be positive");
    let a_free = params.idm_accel * (1.0 - (v / v_desired).powi(4));
    let Some(leader) = leader else {
        return a_free;
    };
    if leader.gap <= 0.0 {
        return COLLISION_IMMINENT_ACCEL;
    }
    let s_star = params.idm_min_gap
        + v * params.idm_headway
        + v * (v - leader.velocity) / (2.0 * (params.idm_accel * params.idm_decel).sqrt());
    a_free - params.idm_accel * (s_star / leader.gap).powi(2)
}
