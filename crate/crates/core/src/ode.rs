//! Dormand–Prince 5(4) embedded Runge–Kutta steps for autonomous systems.

use crate::chart::Vector;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

#[derive(Debug, Clone, Copy)]
pub struct Dp45 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
}

impl Default for Dp45 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: 1e-2, h_min: 1e-14 }
    }
}

impl Dp45 {
    /// One trial step of size `h`: fifth-order solution and scaled error norm.
    pub fn trial(&self, f: &dyn Fn(&Vector) -> Vector, x: &Vector, h: f64) -> (Vector, f64) {
        let mut k: Vec<Vector> = Vec::with_capacity(7);
        for row in &A {
            let mut y = x.clone();
            for (j, kj) in k.iter().enumerate() {
                if row[j] != 0.0 {
                    y += kj * (h * row[j]);
                }
            }
            k.push(f(&y));
        }
        let mut x5 = x.clone();
        let mut err = Vector::zeros(x.len());
        for s in 0..7 {
            x5 += &k[s] * (h * B5[s]);
            err += &k[s] * (h * (B5[s] - B4[s]));
        }
        let norm = err
            .iter()
            .zip(x.iter().zip(x5.iter()))
            .map(|(e, (a, b))| e.abs() / (self.atol + self.rtol * a.abs().max(b.abs())))
            .fold(0.0, f64::max);
        (x5, norm)
    }

    /// Adaptive step from `x` starting with trial size `*h`. Returns the new
    /// state and the step actually taken; `*h` is updated for the next step.
    pub fn step(&self, f: &dyn Fn(&Vector) -> Vector, x: &Vector, h: &mut f64) -> (Vector, f64) {
        *h = h.min(self.h_max).max(self.h_min);
        loop {
            let (x5, err) = self.trial(f, x, *h);
            let finite = x5.iter().all(|v| v.is_finite()) && err.is_finite();
            if finite && (err <= 1.0 || *h <= self.h_min) {
                let used = *h;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                *h = (*h * factor).min(self.h_max);
                return (x5, used);
            }
            let factor = if finite { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            *h = (*h * factor).max(self.h_min);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ode = Dp45 { h_max: 0.5, ..Dp45::default() };
        let f = |x: &Vector| -x;
        let mut x = Vector::from_vec(vec![1.0]);
        let mut t: f64 = 0.0;
        let mut h: f64 = 1e-3;
        while t < 3.0 {
            let mut hh = h.min(3.0 - t);
            let (nx, used) = ode.step(&f, &x, &mut hh);
            x = nx;
            t += used;
            h = hh;
        }
        assert!((x[0] - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rotation_keeps_radius() {
        let ode = Dp45::default();
        let f = |x: &Vector| Vector::from_vec(vec![-x[1], x[0]]);
        let mut x = Vector::from_vec(vec![1.0, 0.0]);
        let mut h: f64 = 1e-3;
        let mut t: f64 = 0.0;
        while t < std::f64::consts::PI {
            let mut hh = h.min(std::f64::consts::PI - t);
            let (nx, used) = ode.step(&f, &x, &mut hh);
            x = nx;
            t += used;
            h = hh;
        }
        assert!((x[0] + 1.0).abs() < 1e-9 && x[1].abs() < 1e-9);
    }
}
