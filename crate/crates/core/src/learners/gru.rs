//! Gated recurrent cell over the lag window, one scalar input per step.
//!
//! ```text
//! z = σ(wz x + Uz h + bz)
//! r = σ(wr x + Ur h + br)
//! n = tanh(wn x + Un (r ⊙ h) + bn)
//! h' = (1 - z) ⊙ n + z ⊙ h
//! f = v · h_T + c
//! ```
//! `h_0 = 0`; each `U` is row-major `[width, width]`.

use crate::scalar::Scalar;

struct Gate<'a, T> {
    w: &'a [T],
    u: &'a [T],
    b: &'a [T],
}

struct View<'a, T> {
    z: Gate<'a, T>,
    r: Gate<'a, T>,
    n: Gate<'a, T>,
    v: &'a [T],
    c: T,
}

fn gate_len(h: usize) -> usize {
    h + h * h + h
}

fn view<T: Scalar>(theta: &[T], h: usize) -> View<'_, T> {
    let gate = |k: usize| {
        let s = &theta[k * gate_len(h)..(k + 1) * gate_len(h)];
        let (w, rest) = s.split_at(h);
        let (u, b) = rest.split_at(h * h);
        Gate { w, u, b }
    };
    let tail = &theta[3 * gate_len(h)..];
    View {
        z: gate(0),
        r: gate(1),
        n: gate(2),
        v: &tail[..h],
        c: tail[h],
    }
}

fn sigmoid<T: Scalar>(a: T) -> T {
    T::one() / (T::one() + (-a).exp())
}

/// `out_i = w_i x + b_i + Σ_j U_ij s_j`
fn affine<T: Scalar>(g: &Gate<'_, T>, x: T, s: &[T], out: &mut [T]) {
    let h = s.len();
    for i in 0..h {
        let row = &g.u[i * h..(i + 1) * h];
        out[i] = row
            .iter()
            .zip(s)
            .fold(g.w[i] * x + g.b[i], |acc, (&u, &sj)| acc + u * sj);
    }
}

/// Activations of one step, kept for the backward pass.
struct Step<T> {
    z: Vec<T>,
    r: Vec<T>,
    n: Vec<T>,
    rh: Vec<T>,
}

fn forward<T: Scalar>(p: &View<'_, T>, h: usize, x: &[T], states: &mut Vec<Vec<T>>, steps: Option<&mut Vec<Step<T>>>) {
    states.clear();
    states.push(vec![T::zero(); h]);
    let mut buf_steps = steps;
    for &xt in x {
        let prev = states.last().expect("initial state present");
        let mut z = vec![T::zero(); h];
        let mut r = vec![T::zero(); h];
        affine(&p.z, xt, prev, &mut z);
        affine(&p.r, xt, prev, &mut r);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        r.iter_mut().for_each(|v| *v = sigmoid(*v));
        let rh: Vec<T> = r.iter().zip(prev).map(|(&a, &b)| a * b).collect();
        let mut n = vec![T::zero(); h];
        affine(&p.n, xt, &rh, &mut n);
        n.iter_mut().for_each(|v| *v = v.tanh());
        let next: Vec<T> = (0..h)
            .map(|i| (T::one() - z[i]) * n[i] + z[i] * prev[i])
            .collect();
        states.push(next);
        if let Some(s) = buf_steps.as_deref_mut() {
            s.push(Step { z, r, n, rh });
        }
    }
}

pub(super) fn predict<T: Scalar>(theta: &[T], h: usize, x: &[T]) -> T {
    let p = view(theta, h);
    let mut states = Vec::with_capacity(x.len() + 1);
    forward(&p, h, x, &mut states, None);
    let last = states.last().expect("at least the initial state");
    last.iter().zip(p.v).fold(p.c, |acc, (&a, &b)| acc + a * b)
}

struct GateGrad<'a, T> {
    w: &'a mut [T],
    u: &'a mut [T],
    b: &'a mut [T],
}

fn split_gate<T>(s: &mut [T], h: usize) -> GateGrad<'_, T> {
    let (w, rest) = s.split_at_mut(h);
    let (u, b) = rest.split_at_mut(h * h);
    GateGrad { w, u, b }
}

/// Accumulates `da` (gradient wrt the gate pre-activation) into the gate's
/// parameters, and `U^T da` into `ds`.
fn gate_backward<T: Scalar>(g: &Gate<'_, T>, gg: &mut GateGrad<'_, T>, da: &[T], x: T, s: &[T], ds: &mut [T]) {
    let h = s.len();
    for i in 0..h {
        let d = da[i];
        gg.w[i] += d * x;
        gg.b[i] += d;
        let urow = &g.u[i * h..(i + 1) * h];
        let grow = &mut gg.u[i * h..(i + 1) * h];
        for j in 0..h {
            grow[j] += d * s[j];
            ds[j] += urow[j] * d;
        }
    }
}

pub(super) fn accumulate<T: Scalar>(theta: &[T], h: usize, x: &[T], y: T, scale: T, grad: &mut [T]) -> T {
    let p = view(theta, h);
    let mut states = Vec::with_capacity(x.len() + 1);
    let mut steps = Vec::with_capacity(x.len());
    forward(&p, h, x, &mut states, Some(&mut steps));
    let last = &states[x.len()];
    let f = last.iter().zip(p.v).fold(p.c, |acc, (&a, &b)| acc + a * b);
    let r = f - y;
    let g = (T::one() + T::one()) * scale * r;

    let gl = gate_len(h);
    let (gz, rest) = grad.split_at_mut(gl);
    let (gr, rest) = rest.split_at_mut(gl);
    let (gn, rest) = rest.split_at_mut(gl);
    let (gv, gc) = rest.split_at_mut(h);
    let mut gz = split_gate(gz, h);
    let mut gr = split_gate(gr, h);
    let mut gn = split_gate(gn, h);
    gc[0] += g;

    let mut dh: Vec<T> = p.v.iter().map(|&v| g * v).collect();
    for (gvi, &hi) in gv.iter_mut().zip(last) {
        *gvi += g * hi;
    }

    let mut dz_pre = vec![T::zero(); h];
    let mut dn_pre = vec![T::zero(); h];
    let mut dr_pre = vec![T::zero(); h];
    let mut drh = vec![T::zero(); h];
    for t in (0..x.len()).rev() {
        let st = &steps[t];
        let prev = &states[t];
        let mut dprev: Vec<T> = (0..h).map(|i| dh[i] * st.z[i]).collect();
        for i in 0..h {
            let dn = dh[i] * (T::one() - st.z[i]);
            let dz = dh[i] * (prev[i] - st.n[i]);
            dn_pre[i] = dn * (T::one() - st.n[i] * st.n[i]);
            dz_pre[i] = dz * st.z[i] * (T::one() - st.z[i]);
        }
        drh.iter_mut().for_each(|v| *v = T::zero());
        gate_backward(&p.n, &mut gn, &dn_pre, x[t], &st.rh, &mut drh);
        for i in 0..h {
            dprev[i] += drh[i] * st.r[i];
            let dr = drh[i] * prev[i];
            dr_pre[i] = dr * st.r[i] * (T::one() - st.r[i]);
        }
        gate_backward(&p.z, &mut gz, &dz_pre, x[t], prev, &mut dprev);
        gate_backward(&p.r, &mut gr, &dr_pre, x[t], prev, &mut dprev);
        dh = dprev;
    }
    r * r
}
