//! Embedded Dormand–Prince 5(4) integrator with 4th-order dense output.
//!
//! Coefficients are the classical DOPRI5 tableau together with the standard
//! continuous-extension weights, so event times can be located inside an
//! accepted step by bisection on the interpolant without re-stepping.

/// One accepted step with the data needed for dense evaluation on it.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub s0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// End of the step.
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    /// Evaluates the interpolant at `s ∈ [s0, s0 + h]`.
    pub fn eval(&self, s: f64) -> [f64; N] {
        let theta = ((s - self.s0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        out
    }
}

/// Step outcome: new state at `s0 + h` plus the dense-output record.
pub struct Accepted<const N: usize> {
    pub y: [f64; N],
    pub dense: DenseStep<N>,
}

/// Adaptive DOPRI5 stepper over an autonomous right-hand side.
pub struct Dopri5<F, const N: usize>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    f: F,
    rtol: f64,
    atol: f64,
    pub h_max: f64,
    pub h_min: f64,
    k1: Option<[f64; N]>, // FSAL cache
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights equal the last A row (FSAL); the embedded 4th-order
// weights follow.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

// Dense-output weights for the quartic continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    pub fn new(f: F, tol: f64) -> Self {
        Self {
            f,
            rtol: tol,
            atol: tol,
            h_max: 0.2,
            h_min: 1e-14,
            k1: None,
        }
    }

    /// Invalidates the FSAL cache (call after rejecting an accepted step).
    pub fn reset(&mut self) {
        self.k1 = None;
    }

    /// Attempts steps from `y` at `s` with suggested size `h` until one is
    /// accepted; returns the accepted step and the size suggestion for the
    /// next one. `h` is capped to `h_max` and clipped to `s_end − s`.
    pub fn step(&mut self, s: f64, y: &[f64; N], h: f64, s_end: f64) -> (Accepted<N>, f64) {
        let mut h = h.clamp(self.h_min, self.h_max).min(s_end - s).max(self.h_min);
        loop {
            let k1 = match self.k1 {
                Some(k) => k,
                None => (self.f)(y),
            };
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for stage in 1..7 {
                let mut yi = *y;
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += A[stage - 1][j] * kj[i];
                    }
                    yi[i] += h * acc;
                }
                k[stage] = (self.f)(&yi);
            }
            // 5th-order solution (stage-7 input state) and error estimate.
            let mut y5 = *y;
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..6 {
                    acc += A[5][j] * k[j][i];
                }
                y5[i] += h * acc;
            }
            let mut err: f64 = 0.0;
            for i in 0..N {
                let mut e4 = 0.0;
                for j in 0..7 {
                    e4 += (if j < 6 { A[5][j] } else { 0.0 } - B4[j]) * k[j][i];
                }
                let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                err += (h * e4 / scale).powi(2);
            }
            err = (err / N as f64).sqrt();

            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            if err <= 1.0 || h <= self.h_min * 1.0000001 {
                // Dense output coefficients.
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y5[i] - y[i];
                    let bspl = h * k[0][i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k[6][i] - bspl;
                    let mut acc = 0.0;
                    for j in 0..7 {
                        acc += D[j] * k[j][i];
                    }
                    rcont[4][i] = h * acc;
                }
                self.k1 = Some(k[6]); // FSAL
                let next_h = (h * factor).min(self.h_max);
                return (
                    Accepted {
                        y: y5,
                        dense: DenseStep { s0: s, h, rcont },
                    },
                    next_h,
                );
            }
            h = (h * factor).max(self.h_min);
        }
    }
}

/// Locates a sign change of `g` on `[a, b]` inside a dense step by
/// bisection, assuming `g` changes sign across the bracket. Returns the
/// bracketed root time to within `tol_s`.
pub fn bisect_on<const N: usize>(
    dense: &DenseStep<N>,
    a: f64,
    b: f64,
    g: impl Fn(&[f64; N]) -> f64,
    tol_s: f64,
) -> f64 {
    let (mut a, mut b) = (a, b);
    let mut ga = g(&dense.eval(a));
    for _ in 0..128 {
        if b - a <= tol_s {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(&dense.eval(m));
        if gm == 0.0 {
            return m;
        }
        if (ga < 0.0) == (gm < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
