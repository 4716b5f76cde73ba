use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Dense feed-forward network with a linear output layer. Parameters live in
/// one flat vector: for each layer, the `in × out` weight matrix in row-major
/// order followed by the `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activation: Activation,
    pub params: Vec<f64>,
}

/// Layer outputs kept from a forward pass for backpropagation.
#[derive(Clone, Debug)]
pub struct Cache {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    acts: Vec<Array2<f64>>,
}

impl Cache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("cache holds at least the input")
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Mlp> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            activation,
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Uniform `±1/sqrt(fan_in)` initialisation.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], activation: Activation, rng: &mut R) -> Result<Mlp> {
        let mut net = Mlp::zeros(sizes, activation)?;
        let mut off = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for p in &mut net.params[off..off + w[0] * w[1] + w[1]] {
                *p = rng.random_range(-bound..bound);
            }
            off += w[0] * w[1] + w[1];
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], activation: Activation, params: Vec<f64>) -> Result<Mlp> {
        let mut net = Mlp::zeros(sizes, activation)?;
        if params.len() != net.params.len() {
            return Err(Error::ShapeMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    fn layer(&self, l: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let off: usize = self.sizes[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let w = ArrayView2::from_shape((i, o), &self.params[off..off + i * o]).expect("layer shape");
        let b = ArrayView1::from(&self.params[off + i * o..off + i * o + o]);
        (w, b)
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.sizes[0] {
            return Err(Error::ShapeMismatch {
                expected: self.sizes[0],
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<Cache> {
        self.check_input(&x)?;
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_owned());
        for l in 0..layers {
            let (w, b) = self.layer(l);
            let mut z = acts[l].dot(&w);
            z += &b;
            if l + 1 < layers {
                let act = self.activation;
                z.mapv_inplace(|v| act.apply(v));
            }
            acts.push(z);
        }
        Ok(Cache { acts })
    }

    /// Batched forward pass: one row per example.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut cache = self.forward_cached(x)?;
        Ok(cache.acts.pop().expect("output layer"))
    }

    /// Parameter gradient of `Σ grad_out ⊙ output` for the batch cached by
    /// [`Mlp::forward_cached`], in the flat parameter layout.
    pub fn backward(&self, cache: &Cache, grad_out: ArrayView2<f64>) -> Result<Vec<f64>> {
        let out = cache.output();
        if grad_out.dim() != out.dim() {
            return Err(Error::ShapeMismatch {
                expected: out.ncols(),
                got: grad_out.ncols(),
            });
        }
        let mut grads = vec![0.0; self.params.len()];
        let layers = self.sizes.len() - 1;
        let mut delta = grad_out.to_owned();
        let mut off = grads.len();
        for l in (0..layers).rev() {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            off -= i * o + o;
            let input = &cache.acts[l];
            {
                let (gw, gb) = grads[off..off + i * o + o].split_at_mut(i * o);
                let mut gw = ArrayViewMut2::from_shape((i, o), gw).expect("grad shape");
                gw.assign(&input.t().dot(&delta));
                ArrayViewMut1::from(gb).assign(&delta.sum_axis(Axis(0)));
            }
            if l > 0 {
                let (w, _) = self.layer(l);
                let mut prev = delta.dot(&w.t());
                let act = self.activation;
                prev.zip_mut_with(input, |d, &a| *d *= act.slope(a));
                delta = prev;
            }
        }
        Ok(grads)
    }

    /// `self ← ρ·other + (1−ρ)·self`.
    pub fn blend_from(&mut self, other: &Mlp, rho: f64) -> Result<()> {
        if other.sizes != self.sizes {
            return Err(Error::ShapeMismatch {
                expected: self.params.len(),
                got: other.params.len(),
            });
        }
        if rho == 1.0 {
            self.params.copy_from_slice(&other.params);
            return Ok(());
        }
        for (p, q) in self.params.iter_mut().zip(&other.params) {
            *p = rho * q + (1.0 - rho) * *p;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                expected: self.m.len(),
                got: grads.len(),
            });
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::zeros(&[3, 5, 5, 2], Activation::Relu).unwrap();
        let x = Array2::from_elem((4, 3), 0.7);
        assert!(net.forward(x.view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let net = Mlp::zeros(&[3, 4, 1], Activation::Relu).unwrap();
        let x = Array2::zeros((2, 5));
        assert!(matches!(net.forward(x.view()), Err(Error::ShapeMismatch { expected: 3, got: 5 })));
        assert!(Mlp::from_params(&[3, 4, 1], Activation::Relu, vec![0.0; 3]).is_err());
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::init(&[3, 4, 2], Activation::Tanh, &mut rng).unwrap();
        let mut p = net.params.clone();
        let mut opt = Adam::new(p.len(), 1e-3);
        let zeros = vec![0.0; p.len()];
        opt.step(&mut p, &zeros).unwrap();
        assert_eq!(p, net.params);
    }

    #[test]
    fn blend_with_unit_rate_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Mlp::init(&[2, 3, 1], Activation::Relu, &mut rng).unwrap();
        let mut b = Mlp::init(&[2, 3, 1], Activation::Relu, &mut rng).unwrap();
        b.blend_from(&a, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_net_by_hand() {
        // 1 -> 1 -> 1: y = w2·relu(w1·x + b1) + b2
        let net = Mlp::from_params(&[1, 1, 1], Activation::Relu, vec![2.0, 0.5, -3.0, 1.0]).unwrap();
        let x = Array2::from_elem((1, 1), 1.5);
        let cache = net.forward_cached(x.view()).unwrap();
        assert_eq!(cache.output()[[0, 0]], -3.0 * 3.5 + 1.0);
        let g = net.backward(&cache, Array2::from_elem((1, 1), 1.0).view()).unwrap();
        assert_eq!(g, vec![-3.0 * 1.5, -3.0, 3.5, 1.0]);
    }
}
