use std::f64::consts::TAU;

use crate::geoflow::surface::IsothermalSurface;
use crate::numcore::{integrate_observed, FnField, IntegrationEnd};
use crate::{Error, Mat2, Result};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Allowed deviation of the metric speed from 1.
pub const SPEED_TOL: f64 = 1e-8;

/// A unit covector `(x, y, theta)`; `theta` is kept in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl FlowState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: theta.rem_euclid(TAU),
        }
    }

    fn from_slice(s: &[f64]) -> Self {
        Self::new(s[0], s[1], s[2])
    }
}

/// Tangent vector `a V + b X_perp` transverse to the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiVector {
    pub a: f64,
    pub b: f64,
}

impl JacobiVector {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.a, c * self.b)
    }
}

fn field_at(s: &IsothermalSurface, x: f64, y: f64, theta: f64) -> [f64; 3] {
    let e = (-s.g(x, y)).exp();
    let d = s.grad(x, y);
    let (sn, cs) = theta.sin_cos();
    [e * cs, e * sn, e * (d[1] * cs - d[0] * sn)]
}

/// `X = e^{-G}(cos t, sin t, G_y cos t - G_x sin t)` in `(x, y, theta)`.
pub fn geodesic_field(s: &IsothermalSurface, st: FlowState) -> Result<[f64; 3]> {
    s.check_domain(st.x, st.y)?;
    Ok(field_at(s, st.x, st.y, st.theta))
}

/// `X_perp = e^{-G}(sin t, -cos t, G_x cos t + G_y sin t)`.
pub fn perp_field(s: &IsothermalSurface, st: FlowState) -> Result<[f64; 3]> {
    s.check_domain(st.x, st.y)?;
    let e = (-s.g(st.x, st.y)).exp();
    let d = s.grad(st.x, st.y);
    let (sn, cs) = st.theta.sin_cos();
    Ok([e * sn, -e * cs, e * (d[0] * cs + d[1] * sn)])
}

/// `V = d/dtheta`.
pub fn vertical_field(_s: &IsothermalSurface, _st: FlowState) -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// `a V + b X_perp` in `(x, y, theta)` coordinates.
pub fn jacobi_to_tangent(s: &IsothermalSurface, st: FlowState, v: JacobiVector) -> Result<[f64; 3]> {
    let p = perp_field(s, st)?;
    Ok([v.b * p[0], v.b * p[1], v.a + v.b * p[2]])
}

fn metric_speed(s: &IsothermalSurface, st: &[f64]) -> f64 {
    let f = field_at(s, st[0], st[1], st[2]);
    s.g(st[0], st[1]).exp() * f[0].hypot(f[1])
}

/// Integrates `(x, y, theta)` together with `k` Jacobi pairs `(a, b)`, the
/// curvature being evaluated at every RK4 stage. `observe` sees every
/// accepted step.
pub(crate) fn co_integrate(
    s: &IsothermalSurface,
    st: FlowState,
    vs: &[JacobiVector],
    t: f64,
    step: f64,
    mut observe: impl FnMut(f64, &[f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    s.check_domain(st.x, st.y)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let k = vs.len();
    let field = FnField::new(3 + 2 * k, |y: &[f64], out: &mut [f64]| {
        if !s.contains(y[0], y[1]) {
            out.fill(f64::NAN);
            return;
        }
        out[..3].copy_from_slice(&field_at(s, y[0], y[1], y[2]));
        if k > 0 {
            let kc = s.curvature_unchecked(y[0], y[1]);
            for j in 0..k {
                let (a, b) = (y[3 + 2 * j], y[4 + 2 * j]);
                out[3 + 2 * j] = kc * b;
                out[4 + 2 * j] = -a;
            }
        }
    });
    let mut init = vec![st.x, st.y, st.theta];
    for v in vs {
        init.extend([v.a, v.b]);
    }
    let mut failure = None;
    let end = integrate_observed(&field, &init, 0.0, t, step, |time, y| {
        let res = if !s.contains(y[0], y[1]) {
            Err(Error::TruncatedTrajectory { exit_time: time })
        } else if (metric_speed(s, y) - 1.0).abs() > SPEED_TOL {
            Err(Error::Undefined(format!("metric speed drifted from 1 at t = {time}")))
        } else {
            observe(time, y)
        };
        match res {
            Ok(()) => true,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    let end = match end {
        Err(Error::BlowUp { t }) => return Err(Error::TruncatedTrajectory { exit_time: t }),
        other => other?,
    };
    if let Some(e) = failure {
        return Err(e);
    }
    match end {
        IntegrationEnd::Completed(y) => Ok(y),
        IntegrationEnd::Stopped { t, .. } => Err(Error::TruncatedTrajectory { exit_time: t }),
    }
}

/// Geodesic flow for time `t` (either sign) by RK4 with the given step.
pub fn flow(s: &IsothermalSurface, st: FlowState, t: f64, step: f64) -> Result<FlowState> {
    let y = co_integrate(s, st, &[], t, step, |_, _| Ok(()))?;
    Ok(FlowState::from_slice(&y))
}

/// The states at every step from 0 to `t`.
pub fn trajectory(s: &IsothermalSurface, st: FlowState, t: f64, step: f64) -> Result<Vec<(f64, FlowState)>> {
    let mut out = Vec::new();
    co_integrate(s, st, &[], t, step, |time, y| {
        out.push((time, FlowState::from_slice(y)));
        Ok(())
    })?;
    Ok(out)
}

/// Jacobi field `(a, b)` after time `t`: `a' = K b`, `b' = -a` along the
/// geodesic through `st`.
pub fn jacobi_flow(
    s: &IsothermalSurface,
    st: FlowState,
    v: JacobiVector,
    t: f64,
    step: f64,
) -> Result<JacobiVector> {
    let y = co_integrate(s, st, &[v], t, step, |_, _| Ok(()))?;
    Ok(JacobiVector::new(y[3], y[4]))
}

/// Matrix of the Jacobi flow in the basis `(V, X_perp)`.
pub fn fundamental_matrix(s: &IsothermalSurface, st: FlowState, t: f64, step: f64) -> Result<Mat2> {
    let y = co_integrate(
        s,
        st,
        &[JacobiVector::new(1.0, 0.0), JacobiVector::new(0.0, 1.0)],
        t,
        step,
        |_, _| Ok(()),
    )?;
    Ok(Mat2::new(y[3], y[5], y[4], y[6]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geoflow::surface::ChartDomain;
    use crate::Vec2;

    #[test]
    fn flat_lines() {
        let s = IsothermalSurface::flat();
        let f = geodesic_field(&s, FlowState::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(f, [1.0, 0.0, 0.0]);
        let end = flow(&s, FlowState::new(0.0, 0.0, 0.0), 1.0, DEFAULT_STEP).unwrap();
        assert!((end.x - 1.0).abs() < 1e-13 && end.y.abs() < 1e-13 && end.theta == 0.0);
        let th = 2.1;
        let end = flow(&s, FlowState::new(0.5, -0.5, th), 2.5, DEFAULT_STEP).unwrap();
        assert!(((end.x - 0.5).hypot(end.y + 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_exponent_rescales_speed() {
        let c = 0.7;
        let s = IsothermalSurface::constant(c);
        let f = geodesic_field(&s, FlowState::new(0.0, 0.0, 1.0)).unwrap();
        let e = (-c as f64).exp();
        assert!((f[0] - e * 1f64.cos()).abs() < 1e-15 && (f[1] - e * 1f64.sin()).abs() < 1e-15 && f[2] == 0.0);
    }

    #[test]
    fn poincare_radial_geodesic() {
        let s = IsothermalSurface::poincare();
        let f = geodesic_field(&s, FlowState::new(0.0, 0.0, std::f64::consts::FRAC_PI_4)).unwrap();
        assert_eq!(f[2], 0.0);
        let end = flow(&s, FlowState::new(0.0, 0.0, 0.0), 1.0, DEFAULT_STEP).unwrap();
        assert!((end.x - 0.5f64.tanh()).abs() < 1e-8, "{}", end.x - 0.5f64.tanh());
        assert!(end.y.abs() < 1e-15);
    }

    #[test]
    fn leaving_the_chart_is_truncation() {
        let s = IsothermalSurface::new(
            "small",
            ChartDomain::Disk { radius: 0.5 },
            |_, _| 0.0,
            |_, _| Vec2::zeros(),
            None,
        )
        .unwrap();
        match flow(&s, FlowState::new(0.0, 0.0, 0.0), 2.0, 1e-2) {
            Err(Error::TruncatedTrajectory { exit_time }) => assert!((exit_time - 0.5).abs() <= 1e-2 + 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flat_jacobi_fields_are_affine() {
        let s = IsothermalSurface::flat();
        let st = FlowState::new(0.0, 0.0, 0.3);
        let v = jacobi_flow(&s, st, JacobiVector::new(0.0, 1.0), 2.0, DEFAULT_STEP).unwrap();
        assert_eq!(v, JacobiVector::new(0.0, 1.0));
        let v = jacobi_flow(&s, st, JacobiVector::new(1.0, 0.0), 2.0, DEFAULT_STEP).unwrap();
        assert!((v.a - 1.0).abs() < 1e-14 && (v.b + 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_wraps() {
        assert!((FlowState::new(0.0, 0.0, -0.5).theta - (TAU - 0.5)).abs() < 1e-15);
    }
}
