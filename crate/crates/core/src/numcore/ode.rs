use crate::{Error, Result};

/// Autonomous vector field `state -> d state / dt`.
pub trait OdeField {
    fn dim(&self) -> usize;
    fn rhs(&self, state: &[f64], out: &mut [f64]);
}

/// An [`OdeField`] backed by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        (self.f)(state, out)
    }
}

/// How an observed integration ended.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationEnd {
    Completed(Vec<f64>),
    /// The observer asked to stop; `t` and `state` are the last accepted values.
    Stopped { t: f64, state: Vec<f64> },
}

/// Classical fixed-step RK4 from `t0` to `t1` (either direction). The last
/// step is shortened to land on `t1` exactly.
pub fn integrate(
    field: &impl OdeField,
    state: &[f64],
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Vec<f64>> {
    match integrate_observed(field, state, t0, t1, step, |_, _| true)? {
        IntegrationEnd::Completed(s) => Ok(s),
        IntegrationEnd::Stopped { state, .. } => Ok(state),
    }
}

/// Like [`integrate`] but calls `observer(t, state)` at `t0` and after every
/// step; returning `false` stops the integration.
pub fn integrate_observed(
    field: &impl OdeField,
    state: &[f64],
    t0: f64,
    t1: f64,
    step: f64,
    mut observer: impl FnMut(f64, &[f64]) -> bool,
) -> Result<IntegrationEnd> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    let dim = field.dim();
    if state.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "state has length {}, field dimension is {dim}",
            state.len()
        )));
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t: t0 });
    }

    let span = t1 - t0;
    let sign = if span < 0.0 { -1.0 } else { 1.0 };
    let ratio = span.abs() / step;
    let mut full_steps = ratio.floor() as usize;
    // treat 999.9999999 as 1000 full steps
    if ratio - (full_steps as f64) > 1.0 - 1e-9 {
        full_steps += 1;
    }
    let remainder = span.abs() - full_steps as f64 * step;

    let mut y = state.to_vec();
    let mut t = t0;
    if !observer(t, &y) {
        return Ok(IntegrationEnd::Stopped { t, state: y });
    }

    let mut ws = Workspace::new(dim);
    for i in 0..full_steps {
        rk4_step(field, &mut y, sign * step, &mut ws);
        t = t0 + sign * step * (i + 1) as f64;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        if !observer(t, &y) {
            return Ok(IntegrationEnd::Stopped { t, state: y });
        }
    }
    if remainder > 1e-12 * step {
        rk4_step(field, &mut y, sign * remainder, &mut ws);
        t = t1;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        if !observer(t, &y) {
            return Ok(IntegrationEnd::Stopped { t, state: y });
        }
    }
    Ok(IntegrationEnd::Completed(y))
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

fn rk4_step(field: &impl OdeField, y: &mut [f64], h: f64, ws: &mut Workspace) {
    let n = y.len();
    field.rhs(y, &mut ws.k1);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k1[i];
    }
    field.rhs(&ws.tmp, &mut ws.k2);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k2[i];
    }
    field.rhs(&ws.tmp, &mut ws.k3);
    for i in 0..n {
        ws.tmp[i] = y[i] + h * ws.k3[i];
    }
    field.rhs(&ws.tmp, &mut ws.k4);
    for i in 0..n {
        y[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}
