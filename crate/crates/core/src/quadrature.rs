//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector integrands.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub converged: bool,
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15<const N: usize>(f: &mut impl FnMut(f64) -> [f64; N], a: f64, b: f64) -> Segment<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(c);
    for n in 0..N {
        kron[n] = WGK[7] * fc[n];
        gauss[n] = WG[3] * fc[n];
    }
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        for n in 0..N {
            let s = f1[n] + f2[n];
            kron[n] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[n] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0;
    let mut value = [0.0; N];
    for n in 0..N {
        value[n] = h * kron[n];
        err += (h * (kron[n] - gauss[n])).abs();
    }
    Segment { a, b, value, error: err }
}

/// Integrates `f` over `[a, b]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol·|Σ value|)`.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Quad<N> {
    if a == b {
        return Quad { value: [0.0; N], error: 0.0, converged: true };
    }
    let mut heap = BinaryHeap::new();
    heap.push(gk15(&mut f, a, b));
    loop {
        let mut total = [0.0; N];
        let mut err = 0.0;
        for s in heap.iter() {
            for n in 0..N {
                total[n] += s.value[n];
            }
            err += s.error;
        }
        let scale: f64 = total.iter().map(|x| x.abs()).sum();
        let done = err <= abs_tol.max(rel_tol * scale);
        if done || heap.len() >= max_segments {
            return Quad { value: total, error: err, converged: done };
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return Quad { value: total, error: err, converged: false };
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
    }
}
