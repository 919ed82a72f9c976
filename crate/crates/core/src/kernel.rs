use serde::{Deserialize, Serialize};

/// Compactly supported smoothing kernels on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    #[default]
    Epanechnikov,
    Uniform,
    Triangular,
}

impl KernelSpec {
    pub const ALL: [KernelSpec; 3] = [
        KernelSpec::Epanechnikov,
        KernelSpec::Uniform,
        KernelSpec::Triangular,
    ];

    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelSpec::Uniform => 0.5,
            KernelSpec::Triangular => 1.0 - a,
        }
    }

    /// `K_h(d) = K(d / h) / h`.
    #[inline]
    pub fn scaled(self, d: f64, h: f64) -> f64 {
        self.eval(d / h) / h
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelSpec::Epanechnikov => "epanechnikov",
            KernelSpec::Uniform => "uniform",
            KernelSpec::Triangular => "triangular",
        }
    }
}

/// Kernel value `K(u)`; zero outside `[-1, 1]`.
pub fn kernel_eval(spec: KernelSpec, u: f64) -> f64 {
    spec.eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epanechnikov_values() {
        assert_eq!(kernel_eval(KernelSpec::Epanechnikov, 0.0), 0.75);
        assert_eq!(kernel_eval(KernelSpec::Epanechnikov, 1.0), 0.0);
        assert_eq!(kernel_eval(KernelSpec::Epanechnikov, -0.5), 0.5625);
    }

    #[test]
    fn kernel_axioms() {
        for spec in KernelSpec::ALL {
            let mut integral = 0.0;
            let steps = 20_000;
            for i in 0..=steps {
                let u = -1.5 + 3.0 * i as f64 / steps as f64;
                let k = spec.eval(u);
                assert!(k >= 0.0);
                assert_eq!(k, spec.eval(-u), "{spec:?} asymmetric at {u}");
                if u.abs() > 1.0 {
                    assert_eq!(k, 0.0);
                }
                integral += k * 3.0 / steps as f64;
            }
            // every kernel here integrates to one
            assert!((integral - 1.0).abs() < 1e-3, "{spec:?}: {integral}");
        }
    }

    #[test]
    fn scaled_kernel() {
        assert_eq!(KernelSpec::Epanechnikov.scaled(0.0, 2.0), 0.375);
        assert_eq!(KernelSpec::Epanechnikov.scaled(2.5, 2.0), 0.0);
    }
}
