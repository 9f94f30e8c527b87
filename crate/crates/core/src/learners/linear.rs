use crate::scalar::Scalar;

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + p * q)
}

pub(super) fn predict<T: Scalar>(theta: &[T], x: &[T]) -> T {
    let w = x.len();
    dot(&theta[..w], x) + theta[w]
}

/// Adds `d(scale * (f(x) - y)^2)/dθ` into `grad` and returns `(f(x) - y)^2`.
pub(super) fn accumulate<T: Scalar>(theta: &[T], x: &[T], y: T, scale: T, grad: &mut [T]) -> T {
    let w = x.len();
    let r = predict(theta, x) - y;
    let g = (T::one() + T::one()) * scale * r;
    for (gi, &xi) in grad[..w].iter_mut().zip(x) {
        *gi += g * xi;
    }
    grad[w] += g;
    r * r
}
