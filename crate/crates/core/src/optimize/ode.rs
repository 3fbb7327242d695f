//! Embedded Dormand-Prince 5(4) stepper for autonomous systems.
//!
//! Minimal single-step driver: the flow loop owns termination, recording and
//! the step-size floor. FSAL is exploited, so an accepted step costs six
//! derivative evaluations.

// Butcher tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// 5th-order weights (b2 = 0).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error coefficients: 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

pub(crate) struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
}

pub(crate) struct StepState {
    pub t: f64,
    pub y: Vec<f64>,
    /// Derivative at `(t, y)`, reused across steps (FSAL).
    pub f: Vec<f64>,
    pub h: f64,
}

fn rms_scaled(v: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / v.len() as f64).sqrt()
}

impl Dopri5 {
    /// Step-size guess from the derivative magnitude plus one Euler probe.
    pub fn initial_step<E>(
        &self,
        y0: &[f64],
        f0: &[f64],
        span: f64,
        mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    ) -> Result<f64, E> {
        let scale = |v: &[f64]| rms_scaled(v, y0, y0, self.rtol, self.atol);
        let d0 = scale(y0);
        let d1 = scale(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
        let f1 = f(&y1)?;
        let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = scale(&df) / h0;
        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d_max).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span))
    }

    /// Attempts one step of size `st.h`. On acceptance advances the state and
    /// proposes the next step size; on rejection only shrinks `st.h`.
    pub fn try_step<E>(
        &self,
        st: &mut StepState,
        mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    ) -> Result<bool, E> {
        let n = st.y.len();
        let h = st.h;
        let comb = |terms: &[(f64, &[f64])]| -> Vec<f64> {
            (0..n)
                .map(|i| st.y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
                .collect()
        };

        let k1 = st.f.clone();
        let k2 = f(&comb(&[(A21, &k1)]))?;
        let k3 = f(&comb(&[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(&comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(&comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = f(&comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let y5 = comb(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y5)?;

        let err_vec: Vec<f64> = (0..n)
            .map(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            })
            .collect();
        let err = rms_scaled(&err_vec, &st.y, &y5, self.rtol, self.atol);

        let factor = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if err <= 1.0 {
            st.t += h;
            st.y = y5;
            st.f = k7;
            st.h = h * factor;
            Ok(true)
        } else {
            st.h = h * factor.min(1.0);
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integrates y' = -y to t = 1 and compares against exp(-1).
    fn decay_error(rtol: f64) -> f64 {
        let stepper = Dopri5 { rtol, atol: rtol * 1e-3 };
        let rhs = |y: &[f64]| -> Result<Vec<f64>, ()> { Ok(vec![-y[0]]) };
        let mut st = StepState { t: 0.0, y: vec![1.0], f: vec![-1.0], h: 0.0 };
        st.h = stepper.initial_step(&st.y.clone(), &st.f.clone(), 1.0, rhs).unwrap();
        while st.t < 1.0 {
            st.h = st.h.min(1.0 - st.t);
            let _ = stepper.try_step(&mut st, rhs).unwrap();
        }
        (st.y[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn integrates_exponential_decay() {
        assert!(decay_error(1e-6) < 1e-6);
    }

    #[test]
    fn tightening_tolerance_reduces_error() {
        let coarse = decay_error(1e-4);
        let fine = decay_error(1e-8);
        assert!(fine < coarse);
        assert!(fine < 1e-8);
    }

    #[test]
    fn rejects_oversized_steps() {
        let stepper = Dopri5 { rtol: 1e-10, atol: 1e-12 };
        let rhs = |y: &[f64]| -> Result<Vec<f64>, ()> { Ok(vec![-10.0 * y[0]]) };
        let mut st = StepState { t: 0.0, y: vec![1.0], f: vec![-10.0], h: 1.0 };
        let accepted = stepper.try_step(&mut st, rhs).unwrap();
        assert!(!accepted);
        assert!(st.h < 1.0);
        assert_eq!(st.t, 0.0);
    }
}
