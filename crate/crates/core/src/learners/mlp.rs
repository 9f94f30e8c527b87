//! `f(x) = v · tanh(W x + b) + c`, with `W` stored row-major `[width, input]`.

use crate::scalar::Scalar;

struct View<'a, T> {
    w: &'a [T],
    b: &'a [T],
    v: &'a [T],
    c: T,
}

fn view<T: Scalar>(theta: &[T], width: usize, input: usize) -> View<'_, T> {
    let (w, rest) = theta.split_at(width * input);
    let (b, rest) = rest.split_at(width);
    let (v, rest) = rest.split_at(width);
    View { w, b, v, c: rest[0] }
}

fn hidden<T: Scalar>(p: &View<'_, T>, x: &[T], out: &mut Vec<T>) {
    let input = x.len();
    out.clear();
    out.extend(p.w.chunks_exact(input).zip(p.b).map(|(row, &bj)| {
        row.iter()
            .zip(x)
            .fold(bj, |acc, (&wji, &xi)| acc + wji * xi)
            .tanh()
    }));
}

pub(super) fn predict<T: Scalar>(theta: &[T], width: usize, x: &[T]) -> T {
    let p = view(theta, width, x.len());
    let mut h = Vec::with_capacity(width);
    hidden(&p, x, &mut h);
    h.iter().zip(p.v).fold(p.c, |acc, (&hj, &vj)| acc + hj * vj)
}

pub(super) fn accumulate<T: Scalar>(
    theta: &[T],
    width: usize,
    x: &[T],
    y: T,
    scale: T,
    grad: &mut [T],
) -> T {
    let input = x.len();
    let p = view(theta, width, input);
    let mut h = Vec::with_capacity(width);
    hidden(&p, x, &mut h);
    let f = h.iter().zip(p.v).fold(p.c, |acc, (&hj, &vj)| acc + hj * vj);
    let r = f - y;
    let g = (T::one() + T::one()) * scale * r;

    let (gw, rest) = grad.split_at_mut(width * input);
    let (gb, rest) = rest.split_at_mut(width);
    let (gv, rest) = rest.split_at_mut(width);
    rest[0] += g;
    for j in 0..width {
        gv[j] += g * h[j];
        let da = g * p.v[j] * (T::one() - h[j] * h[j]);
        gb[j] += da;
        for (gwji, &xi) in gw[j * input..(j + 1) * input].iter_mut().zip(x) {
            *gwji += da * xi;
        }
    }
    r * r
}
