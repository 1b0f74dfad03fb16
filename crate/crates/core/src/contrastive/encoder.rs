use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::nn::{Activation, Mlp, MlpCache};
use crate::dsp::{normalize, Spectrogram};
use crate::error::{Error, Result};
use crate::rng;

/// Latent dimension on the unit hypersphere.
pub const PROJ_DIM: usize = 64;
/// Norms at or below this map to the first basis vector.
pub const NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Spectrogram shape `(T, F)` the encoder accepts.
    pub input_dims: (usize, usize),
    /// Average-pooled grid `(T', F')` fed to the first dense layer.
    pub grid: (usize, usize),
    pub hidden_sizes: Vec<usize>,
    pub embed_dim: usize,
    pub proj_dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            // 5 s at 48 kHz with n_fft 1024, hop 512
            input_dims: (467, 513),
            grid: (16, 16),
            hidden_sizes: vec![512, 256],
            embed_dim: 256,
            proj_dim: PROJ_DIM,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let (t, f) = self.input_dims;
        let (gt, gf) = self.grid;
        if gt == 0 || gf == 0 || gt > t || gf > f {
            return Err(Error::config(format!(
                "pool grid {:?} must be non-empty and no larger than the input {:?}",
                self.grid, self.input_dims
            )));
        }
        if self.hidden_sizes.contains(&0) || self.embed_dim == 0 {
            return Err(Error::config("hidden and embedding sizes must be >= 1"));
        }
        if self.proj_dim != PROJ_DIM {
            return Err(Error::config(format!("proj_dim must be {PROJ_DIM}")));
        }
        Ok(())
    }

    pub fn pooled_len(&self) -> usize {
        self.grid.0 * self.grid.1
    }
}

/// Adaptive average pooling of a row-major `t × f` matrix onto a `gt × gf` grid.
pub fn pool_grid(values: &[f64], t: usize, f: usize, gt: usize, gf: usize) -> Vec<f64> {
    let edges = |n: usize, g: usize, i: usize| (i * n / g, ((i + 1) * n).div_ceil(g));
    let mut out = Vec::with_capacity(gt * gf);
    for i in 0..gt {
        let (t0, t1) = edges(t, gt, i);
        for j in 0..gf {
            let (f0, f1) = edges(f, gf, j);
            let mut s = 0.0;
            for row in t0..t1 {
                s += values[row * f + f0..row * f + f1].iter().sum::<f64>();
            }
            out.push(s / ((t1 - t0) * (f1 - f0)) as f64);
        }
    }
    out
}

/// Row-wise L2 normalisation; zero rows become `e1`.
pub fn normalize_rows(y: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let mut z = y.clone();
    let mut norms = Array1::zeros(y.nrows());
    for (i, mut row) in z.rows_mut().into_iter().enumerate() {
        let n = row.dot(&row).sqrt();
        norms[i] = n;
        if n <= NORM_EPS {
            row.fill(0.0);
            row[0] = 1.0;
        } else {
            row /= n;
        }
    }
    (z, norms)
}

/// Backbone (pooled spectrogram → embedding) plus projector (→ unit latent).
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub backbone: Mlp,
    pub projector: Mlp,
}

/// Intermediate values kept for backpropagation.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    backbone: MlpCache,
    projector: MlpCache,
    z: Array2<f64>,
    norms: Array1<f64>,
}

impl Encoder {
    pub fn new(config: EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::stream(seed, &[rng::tag("encoder-init")]);
        let mut sizes = vec![config.pooled_len()];
        sizes.extend(&config.hidden_sizes);
        sizes.push(config.embed_dim);
        let backbone = Mlp::init(&sizes, Activation::Relu, &mut r);
        let projector = Mlp::init(&[config.embed_dim, config.proj_dim], Activation::Identity, &mut r);
        Ok(Self {
            config,
            backbone,
            projector,
        })
    }

    /// Normalised, pooled input vector for one spectrogram.
    pub fn features(&self, spec: &Spectrogram) -> Result<Vec<f64>> {
        features_for(&self.config, spec)
    }

    /// Embeddings and unit latents for a batch of pooled feature rows.
    pub fn forward(&self, x: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let e = self.backbone.forward(x);
        let y = self.projector.forward(&e);
        (e, normalize_rows(&y).0)
    }

    pub fn latents(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward(x).1
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, EncoderCache) {
        let (e, backbone) = self.backbone.forward_cached(x);
        let (y, projector) = self.projector.forward_cached(&e);
        let (z, norms) = normalize_rows(&y);
        let cache = EncoderCache {
            backbone,
            projector,
            z: z.clone(),
            norms,
        };
        (z, cache)
    }

    /// Parameter gradients (ordered like [`Encoder::tensors_mut`]) given `dL/dz`.
    pub fn backward(&self, cache: &EncoderCache, dz: &Array2<f64>) -> Vec<Vec<f64>> {
        let mut dy = dz.clone();
        for (i, mut row) in dy.rows_mut().into_iter().enumerate() {
            let n = cache.norms[i];
            if n <= NORM_EPS {
                row.fill(0.0);
                continue;
            }
            let zi = cache.z.row(i);
            let proj = zi.dot(&row);
            row.zip_mut_with(&zi, |g, &z| *g = (*g - z * proj) / n);
        }
        let (mut g_proj, de) = self.projector.backward(&cache.projector, &dy);
        let (mut grads, _) = self.backbone.backward(&cache.backbone, &de);
        grads.append(&mut g_proj);
        grads
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.backbone.tensors_mut();
        t.extend(self.projector.tensors_mut());
        t
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.backbone.tensors();
        t.extend(self.projector.tensors());
        t
    }

    pub fn tensor_shapes(&self) -> Vec<(usize, usize)> {
        let mut s = self.backbone.tensor_shapes();
        s.extend(self.projector.tensor_shapes());
        s
    }

    pub fn round_to_f32(&mut self) {
        self.backbone.round_to_f32();
        self.projector.round_to_f32();
    }

    /// Embedding and latent for a single spectrogram.
    pub fn encode(&self, spec: &Spectrogram) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = Array2::from_shape_vec((1, self.config.pooled_len()), self.features(spec)?)
            .map_err(|e| Error::data(e.to_string()))?;
        let (e, z) = self.forward(&x);
        Ok((e.row(0).to_vec(), z.row(0).to_vec()))
    }
}

/// Spectrogram → `log(1+x)` standardisation → pooled grid.
pub fn features_for(config: &EncoderConfig, spec: &Spectrogram) -> Result<Vec<f64>> {
    if spec.shape() != config.input_dims {
        return Err(Error::config(format!(
            "spectrogram shape {:?} does not match encoder input {:?}",
            spec.shape(),
            config.input_dims
        )));
    }
    let n = normalize(spec);
    Ok(pool_grid(&n.mags, n.t_frames, n.f_bins, config.grid.0, config.grid.1))
}
