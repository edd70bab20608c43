//! Legendre memory unit: the fixed linear delay network, shifted Legendre
//! decoding, and the recurrent cell that couples the memory with a nonlinear
//! hidden state.
//!
//! The delay network is a linear system `dm/dt = A m + B u` that approximates
//! a pure delay of length `theta` over a sliding window; its state `m`
//! projects the recent input history onto the first `d` shifted Legendre
//! polynomials. The cell wraps the network with learned encoders that write a
//! scalar signal into the memory and learned kernels that read input, hidden
//! state, and memory into the next hidden state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};

/// The fixed linear memory system of one LMU layer.
///
/// `a_matrix`/`b_vector` are the continuous-time matrices; `a_bar`/`b_bar`
/// the forward-Euler discretized ones actually used by [`step`]. They are
/// built once and never trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayNetwork {
    /// Window length, in time units.
    pub theta: f64,
    /// Discretization step, in the same units.
    pub dt: f64,
    /// Memory order (number of Legendre coefficients kept).
    pub d: usize,
    /// Continuous-time state matrix, `d x d`.
    pub a_matrix: Mat,
    /// Continuous-time input vector, length `d`.
    pub b_vector: Vec<f64>,
    /// Discretized state matrix `(dt/theta) * A + I`.
    pub a_bar: Mat,
    /// Discretized input vector `(dt/theta) * B`.
    pub b_bar: Vec<f64>,
}

/// Builds the delay network for window `theta`, step `dt` and order `d`.
///
/// Entry `(i, j)` of A is `(2i+1)/theta * (-1 if i < j, else (-1)^(i-j+1))`
/// and entry `i` of B is `(2i+1)/theta * (-1)^i`, with zero-based indices.
pub fn build_delay_network(theta: f64, dt: f64, d: usize) -> Result<DelayNetwork> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("window length must be positive, got {theta}"),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("step must be positive, got {dt}"),
        });
    }
    if d == 0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: "memory order must be at least 1".into(),
        });
    }
    if dt > theta {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("dt = {dt} exceeds theta = {theta}; the Euler step is unstable"),
        });
    }

    let a_matrix = Mat::from_fn(d, d, |i, j| {
        let scale = (2 * i + 1) as f64 / theta;
        if i < j {
            -scale
        } else {
            scale * sign_pow(i - j + 1)
        }
    });
    let b_vector: Vec<f64> = (0..d)
        .map(|i| (2 * i + 1) as f64 / theta * sign_pow(i))
        .collect();

    let ratio = dt / theta;
    let mut a_bar = Mat::from_fn(d, d, |i, j| ratio * a_matrix.get(i, j));
    for i in 0..d {
        a_bar.set(i, i, a_bar.get(i, i) + 1.0);
    }
    let b_bar: Vec<f64> = b_vector.iter().map(|b| ratio * b).collect();

    Ok(DelayNetwork {
        theta,
        dt,
        d,
        a_matrix,
        b_vector,
        a_bar,
        b_bar,
    })
}

#[inline]
fn sign_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Shifted Legendre polynomial `P_i(r)` on `[0, 1]`:
/// `(-1)^i * sum_j C(i,j) * C(i+j,j) * (-r)^j`.
///
/// Binomial coefficients are computed exactly in integer arithmetic so the
/// endpoint identities `P_i(1) = 1` and `P_i(0) = (-1)^i` hold exactly.
pub fn legendre_shifted(i: usize, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("evaluation point must lie in [0, 1], got {r}"),
        });
    }
    let mut sum = 0.0;
    let mut neg_r_pow = 1.0; // (-r)^j
    for j in 0..=i {
        let coeff = (binomial(i, j) * binomial(i + j, j)) as f64;
        sum += coeff * neg_r_pow;
        neg_r_pow *= -r;
    }
    Ok(sign_pow(i) * sum)
}

/// Exact binomial coefficient; sized for the memory orders used here (d <= ~30).
fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for step in 1..=k {
        // The running product of `step` consecutive integers is divisible by
        // `step`, so this stays exact.
        acc = acc * (n - k + step) as u128 / step as u128;
    }
    acc
}

/// Named hidden nonlinearity of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed in terms of the activation output `h = f(z)`.
    #[inline]
    pub fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Sigmoid => h * (1.0 - h),
        }
    }
}

/// Trainable parameters of one LMU layer plus its scalar output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmuParams {
    /// Input dimension (1 for the univariate wind series).
    pub input_size: usize,
    /// Hidden size.
    pub n: usize,
    /// Memory order; must match the delay network.
    pub d: usize,
    /// Input encoder, length `input_size`.
    pub e_x: Vec<f64>,
    /// Hidden-state encoder, length `n`.
    pub e_h: Vec<f64>,
    /// Memory encoder, length `d`.
    pub e_m: Vec<f64>,
    /// Input kernel, `n x input_size`.
    pub w_x: Mat,
    /// Hidden kernel, `n x n`.
    pub w_h: Mat,
    /// Memory kernel, `n x d`.
    pub w_m: Mat,
    pub hidden_activation: Activation,
    /// Linear head mapping the final hidden state to a scalar forecast.
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl LmuParams {
    /// Validates that all shapes are mutually consistent.
    pub fn new(
        input_size: usize,
        n: usize,
        d: usize,
        e_x: Vec<f64>,
        e_h: Vec<f64>,
        e_m: Vec<f64>,
        w_x: Mat,
        w_h: Mat,
        w_m: Mat,
        hidden_activation: Activation,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        let checks: &[(&'static str, usize, usize)] = &[
            ("e_x", e_x.len(), input_size),
            ("e_h", e_h.len(), n),
            ("e_m", e_m.len(), d),
            ("w_x rows", w_x.rows(), n),
            ("w_x cols", w_x.cols(), input_size),
            ("w_h rows", w_h.rows(), n),
            ("w_h cols", w_h.cols(), n),
            ("w_m rows", w_m.rows(), n),
            ("w_m cols", w_m.cols(), d),
            ("output_weights", output_weights.len(), n),
        ];
        for &(what, got, expected) in checks {
            if got != expected {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    got,
                });
            }
        }
        let params = LmuParams {
            input_size,
            n,
            d,
            e_x,
            e_h,
            e_m,
            w_x,
            w_h,
            w_m,
            hidden_activation,
            output_weights,
            output_bias,
        };
        if !params.is_finite() {
            return Err(Error::NonFinite("LmuParams"));
        }
        Ok(params)
    }

    /// Seeded initialization: `e_x = 1`, `e_h = e_m = 0`, kernels uniform in
    /// `+-1/sqrt(fan_in)`, zero output bias.
    pub fn init<R: Rng>(
        input_size: usize,
        n: usize,
        d: usize,
        hidden_activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if input_size == 0 || n == 0 || d == 0 {
            return Err(Error::InvalidParameter {
                name: "dimensions",
                reason: format!("input_size={input_size}, n={n}, d={d} must all be positive"),
            });
        }
        let mut uniform = |fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            rng.gen_range(-bound..bound)
        };
        let w_x = Mat::from_fn(n, input_size, |_, _| uniform(input_size));
        let w_h = Mat::from_fn(n, n, |_, _| uniform(n));
        let w_m = Mat::from_fn(n, d, |_, _| uniform(d));
        let output_weights: Vec<f64> = (0..n).map(|_| uniform(n)).collect();
        LmuParams::new(
            input_size,
            n,
            d,
            vec![1.0; input_size],
            vec![0.0; n],
            vec![0.0; d],
            w_x,
            w_h,
            w_m,
            hidden_activation,
            output_weights,
            0.0,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.e_x.iter().all(|v| v.is_finite())
            && self.e_h.iter().all(|v| v.is_finite())
            && self.e_m.iter().all(|v| v.is_finite())
            && self.w_x.is_finite()
            && self.w_h.is_finite()
            && self.w_m.is_finite()
            && self.output_weights.iter().all(|v| v.is_finite())
            && self.output_bias.is_finite()
    }

    /// Number of trainable scalars.
    pub fn param_count(&self) -> usize {
        self.input_size
            + self.n
            + self.d
            + self.n * self.input_size
            + self.n * self.n
            + self.n * self.d
            + self.n
            + 1
    }
}

/// Runtime state of one cell: hidden vector, memory vector, and optional
/// per-step traces consumed by backpropagation through time.
#[derive(Debug, Clone, PartialEq)]
pub struct LmuState {
    pub h: Vec<f64>,
    pub m: Vec<f64>,
    recording: bool,
    pub u_trace: Vec<f64>,
    pub h_trace: Vec<Vec<f64>>,
    pub m_trace: Vec<Vec<f64>>,
}

impl LmuState {
    /// Fresh all-zero state without trace recording.
    pub fn new(n: usize, d: usize) -> Self {
        LmuState {
            h: vec![0.0; n],
            m: vec![0.0; d],
            recording: false,
            u_trace: Vec::new(),
            h_trace: Vec::new(),
            m_trace: Vec::new(),
        }
    }

    /// Fresh all-zero state that records per-step traces.
    pub fn recording(n: usize, d: usize) -> Self {
        let mut state = Self::new(n, d);
        state.recording = true;
        state
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    /// Number of steps processed since reset (only tracked when recording).
    pub fn steps(&self) -> usize {
        self.u_trace.len()
    }

    pub fn reset(&mut self) {
        self.h.iter_mut().for_each(|v| *v = 0.0);
        self.m.iter_mut().for_each(|v| *v = 0.0);
        self.u_trace.clear();
        self.h_trace.clear();
        self.m_trace.clear();
    }

    fn is_finite(&self) -> bool {
        self.h.iter().all(|v| v.is_finite()) && self.m.iter().all(|v| v.is_finite())
    }
}

/// Advances the cell by one step:
/// `u_t = e_x . x_t + e_h . h + e_m . m`, then `m <- A_bar m + B_bar u_t`,
/// then `h <- f(W_x x_t + W_h h + W_m m)`.
pub fn step(
    state: &mut LmuState,
    dn: &DelayNetwork,
    params: &LmuParams,
    x_t: &[f64],
) -> Result<()> {
    if x_t.len() != params.input_size {
        return Err(Error::DimensionMismatch {
            what: "x_t",
            expected: params.input_size,
            got: x_t.len(),
        });
    }
    if dn.d != params.d {
        return Err(Error::DimensionMismatch {
            what: "delay network order",
            expected: params.d,
            got: dn.d,
        });
    }
    if state.h.len() != params.n || state.m.len() != params.d {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: params.n,
            got: state.h.len(),
        });
    }
    if x_t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input x_t"));
    }
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }

    let u_t = dot(&params.e_x, x_t) + dot(&params.e_h, &state.h) + dot(&params.e_m, &state.m);

    let mut m_next = vec![0.0; params.d];
    dn.a_bar.matvec(&state.m, &mut m_next);
    for (m, &b) in m_next.iter_mut().zip(&dn.b_bar) {
        *m += b * u_t;
    }

    let mut h_next = vec![0.0; params.n];
    params.w_x.matvec(x_t, &mut h_next);
    let mut acc = vec![0.0; params.n];
    params.w_h.matvec(&state.h, &mut acc);
    for (h, a) in h_next.iter_mut().zip(&acc) {
        *h += a;
    }
    params.w_m.matvec(&m_next, &mut acc);
    for (h, a) in h_next.iter_mut().zip(&acc) {
        *h = params.hidden_activation.apply(*h + a);
    }

    state.m = m_next;
    state.h = h_next;
    if state.recording {
        state.u_trace.push(u_t);
        state.h_trace.push(state.h.clone());
        state.m_trace.push(state.m.clone());
    }
    Ok(())
}

/// Runs `window` through the cell from a zero state and applies the linear
/// output head to the final hidden state. Windows are independent samples;
/// no state carries over between them.
pub fn forward_window(
    dn: &DelayNetwork,
    params: &LmuParams,
    window: &[f64],
) -> Result<(f64, LmuState)> {
    forward_window_with(dn, params, window, false)
}

/// Same as [`forward_window`] but records per-step traces for
/// backpropagation through time.
pub fn forward_window_traced(
    dn: &DelayNetwork,
    params: &LmuParams,
    window: &[f64],
) -> Result<(f64, LmuState)> {
    forward_window_with(dn, params, window, true)
}

fn forward_window_with(
    dn: &DelayNetwork,
    params: &LmuParams,
    window: &[f64],
    record: bool,
) -> Result<(f64, LmuState)> {
    if window.is_empty() {
        return Err(Error::EmptyInput("window"));
    }
    if params.input_size != 1 {
        return Err(Error::DimensionMismatch {
            what: "input_size (scalar windows)",
            expected: 1,
            got: params.input_size,
        });
    }
    let mut state = if record {
        LmuState::recording(params.n, params.d)
    } else {
        LmuState::new(params.n, params.d)
    };
    for &x in window {
        step(&mut state, dn, params, std::slice::from_ref(&x))?;
    }
    let pred = dot(&params.output_weights, &state.h) + params.output_bias;
    Ok((pred, state))
}

/// Decodes the input delayed by `theta_prime` from a memory vector:
/// `sum_i P_i(theta_prime / theta) * m_i`.
pub fn decode_delay(dn: &DelayNetwork, m: &[f64], theta_prime: f64) -> Result<f64> {
    if !(0.0..=dn.theta).contains(&theta_prime) {
        return Err(Error::InvalidParameter {
            name: "theta_prime",
            reason: format!("delay must lie in [0, {}], got {theta_prime}", dn.theta),
        });
    }
    if m.len() != dn.d {
        return Err(Error::DimensionMismatch {
            what: "memory vector",
            expected: dn.d,
            got: m.len(),
        });
    }
    let r = theta_prime / dn.theta;
    let mut acc = 0.0;
    for (i, &mi) in m.iter().enumerate() {
        acc += legendre_shifted(i, r)? * mi;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn golden_matrices_theta4_dt1_d2() {
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        // A = (1/4) [[-1, -1], [3, -3]], B = [1/4, -3/4]
        assert_eq!(dn.a_matrix.data(), &[-0.25, -0.25, 0.75, -0.75]);
        assert_eq!(dn.b_vector, vec![0.25, -0.75]);
        assert_eq!(dn.a_bar.data(), &[0.9375, -0.0625, 0.1875, 0.8125]);
        assert_eq!(dn.b_bar, vec![0.0625, -0.1875]);
    }

    #[test]
    fn golden_matrices_theta1_dt1_d1() {
        let dn = build_delay_network(1.0, 1.0, 1).unwrap();
        assert_eq!(dn.a_matrix.data(), &[-1.0]);
        assert_eq!(dn.b_vector, vec![1.0]);
        assert_eq!(dn.a_bar.data(), &[0.0]);
        assert_eq!(dn.b_bar, vec![1.0]);
    }

    #[test]
    fn discretization_identity_holds_elementwise() {
        let dn = build_delay_network(7.5, 0.5, 6).unwrap();
        let ratio = dn.dt / dn.theta;
        for i in 0..dn.d {
            for j in 0..dn.d {
                let expected = ratio * dn.a_matrix.get(i, j) + if i == j { 1.0 } else { 0.0 };
                assert_eq!(dn.a_bar.get(i, j), expected);
            }
            assert_eq!(dn.b_bar[i], ratio * dn.b_vector[i]);
        }
    }

    #[test]
    fn rejects_bad_construction_parameters() {
        assert!(build_delay_network(0.0, 1.0, 2).is_err());
        assert!(build_delay_network(-4.0, 1.0, 2).is_err());
        assert!(build_delay_network(4.0, 0.0, 2).is_err());
        assert!(build_delay_network(4.0, 1.0, 0).is_err());
        assert!(build_delay_network(1.0, 2.0, 2).is_err(), "dt > theta");
    }

    #[test]
    fn legendre_low_degrees() {
        // P_1(r) = 2r - 1
        assert_eq!(legendre_shifted(1, 0.5).unwrap(), 0.0);
        assert_eq!(legendre_shifted(1, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_shifted(1, 0.0).unwrap(), -1.0);
        assert_eq!(legendre_shifted(0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn legendre_endpoint_identities_exact() {
        for i in 0..=10 {
            assert_eq!(legendre_shifted(i, 1.0).unwrap(), 1.0, "P_{i}(1)");
            assert_eq!(
                legendre_shifted(i, 0.0).unwrap(),
                if i % 2 == 0 { 1.0 } else { -1.0 },
                "P_{i}(0)"
            );
        }
    }

    #[test]
    fn legendre_degree3_matches_bruteforce_binomial_sum() {
        // Independent route: exact integer binomials accumulated term by term.
        let r: f64 = 0.25;
        let i = 3usize;
        let mut expected = 0.0;
        for j in 0..=i {
            let c1 = binomial(i, j) as f64;
            let c2 = binomial(i + j, j) as f64;
            expected += c1 * c2 * (-r).powi(j as i32);
        }
        expected *= -1.0; // (-1)^3
        assert!(approx(legendre_shifted(i, r).unwrap(), expected, 1e-15));
        // Also against the closed form P_3(r) = 20r^3 - 30r^2 + 12r - 1.
        let closed = 20.0 * r.powi(3) - 30.0 * r.powi(2) + 12.0 * r - 1.0;
        assert!(approx(legendre_shifted(i, r).unwrap(), closed, 1e-12));
    }

    #[test]
    fn legendre_rejects_out_of_range() {
        assert!(legendre_shifted(2, -0.1).is_err());
        assert!(legendre_shifted(2, 1.1).is_err());
    }

    fn toy_params(n: usize, d: usize) -> LmuParams {
        LmuParams::new(
            1,
            n,
            d,
            vec![1.0],
            vec![0.0; n],
            vec![0.0; d],
            Mat::zeros(n, 1),
            Mat::zeros(n, n),
            Mat::zeros(n, d),
            Activation::Tanh,
            vec![0.0; n],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn step_zero_state_zero_input_stays_zero() {
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let params = toy_params(2, 2);
        let mut state = LmuState::new(2, 2);
        step(&mut state, &dn, &params, &[0.0]).unwrap();
        assert!(state.h.iter().all(|&v| v == 0.0));
        assert!(state.m.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_matches_hand_expansion() {
        // e_x = [1], everything else zero except W_m = row of identity scale:
        // u = 1, m = B_bar, h = f(W_m m).
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let mut params = toy_params(1, 2);
        params.w_m = Mat::from_fn(1, 2, |_, j| if j == 0 { 1.0 } else { 0.0 });
        let mut state = LmuState::recording(1, 2);
        step(&mut state, &dn, &params, &[1.0]).unwrap();
        assert_eq!(state.u_trace, vec![1.0]);
        assert_eq!(state.m, dn.b_bar);
        assert_eq!(state.h[0], dn.b_bar[0].tanh());
    }

    #[test]
    fn step_rejects_nan_state_and_input() {
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let params = toy_params(2, 2);
        let mut state = LmuState::new(2, 2);
        assert_eq!(
            step(&mut state, &dn, &params, &[f64::NAN]),
            Err(Error::NonFinite("input x_t"))
        );
        state.h[0] = f64::NAN;
        assert_eq!(
            step(&mut state, &dn, &params, &[0.0]),
            Err(Error::NonFinite("state"))
        );
    }

    #[test]
    fn step_is_deterministic() {
        let dn = build_delay_network(10.0, 1.0, 10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let params = LmuParams::init(1, 4, 10, Activation::Tanh, &mut rng).unwrap();
        let window: Vec<f64> = (0..20).map(|t| (t as f64 * 0.3).sin()).collect();
        let (p1, s1) = forward_window(&dn, &params, &window).unwrap();
        let (p2, s2) = forward_window(&dn, &params, &window).unwrap();
        assert!(p1.to_bits() == p2.to_bits());
        assert_eq!(s1.h, s2.h);
        assert_eq!(s1.m, s2.m);
    }

    #[test]
    fn forward_window_zero_everything_predicts_zero() {
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let params = toy_params(3, 2);
        let (pred, _) = forward_window(&dn, &params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pred, 0.0);
    }

    #[test]
    fn forward_window_matches_manual_unroll() {
        // Constant window, L = 3, d = 2, n = 1, identity-ish toy weights.
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let mut params = toy_params(1, 2);
        params.w_x = Mat::from_fn(1, 1, |_, _| 0.5);
        params.w_h = Mat::from_fn(1, 1, |_, _| 0.25);
        params.w_m = Mat::from_fn(1, 2, |_, _| 1.0);
        params.output_weights = vec![2.0];
        params.output_bias = 0.1;
        let c = 0.8;
        // Manual unroll of the recurrence.
        let mut h = 0.0_f64;
        let mut m = [0.0_f64; 2];
        for _ in 0..3 {
            let u = c; // e_x = [1], e_h = e_m = 0
            let m_new = [
                dn.a_bar.get(0, 0) * m[0] + dn.a_bar.get(0, 1) * m[1] + dn.b_bar[0] * u,
                dn.a_bar.get(1, 0) * m[0] + dn.a_bar.get(1, 1) * m[1] + dn.b_bar[1] * u,
            ];
            h = (0.5 * c + 0.25 * h + m_new[0] + m_new[1]).tanh();
            m = m_new;
        }
        let expected = 2.0 * h + 0.1;
        let (pred, state) = forward_window(&dn, &params, &[c, c, c]).unwrap();
        assert!(approx(pred, expected, 1e-15));
        assert!(approx(state.m[0], m[0], 1e-15));
        assert!(approx(state.m[1], m[1], 1e-15));
    }

    #[test]
    fn forward_window_rejects_empty_and_nan() {
        let dn = build_delay_network(4.0, 1.0, 2).unwrap();
        let params = toy_params(2, 2);
        assert_eq!(
            forward_window(&dn, &params, &[]),
            Err(Error::EmptyInput("window"))
        );
        assert!(forward_window(&dn, &params, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn decode_zero_memory_is_zero() {
        let dn = build_delay_network(4.0, 1.0, 3).unwrap();
        for tp in [0.0, 1.0, 4.0] {
            assert_eq!(decode_delay(&dn, &[0.0, 0.0, 0.0], tp).unwrap(), 0.0);
        }
    }

    #[test]
    fn decode_order_one_returns_coefficient() {
        let dn = build_delay_network(2.0, 1.0, 1).unwrap();
        assert_eq!(decode_delay(&dn, &[3.25], 1.3).unwrap(), 3.25);
    }

    #[test]
    fn decode_rejects_out_of_window_delay() {
        let dn = build_delay_network(2.0, 1.0, 1).unwrap();
        assert!(decode_delay(&dn, &[1.0], 2.5).is_err());
        assert!(decode_delay(&dn, &[1.0], -0.1).is_err());
    }

    #[test]
    fn matrix_construction_matches_naive_double_loop() {
        for &theta in &[1.0, 4.0, 10.0] {
            for d in 1..=20 {
                let dn = build_delay_network(theta, theta.min(1.0), d).unwrap();
                for i in 0..d {
                    for j in 0..d {
                        let scale = (2 * i + 1) as f64 / theta;
                        let expected = if i < j {
                            -scale
                        } else if (i - j + 1) % 2 == 0 {
                            scale
                        } else {
                            -scale
                        };
                        assert_eq!(dn.a_matrix.get(i, j), expected, "A[{i}][{j}] theta={theta}");
                    }
                    let expected_b =
                        (2 * i + 1) as f64 / theta * if i % 2 == 0 { 1.0 } else { -1.0 };
                    assert_eq!(dn.b_vector[i], expected_b, "B[{i}] theta={theta}");
                }
            }
        }
    }
}
