//! Binary parameter files: magic, format version, tensor count, then per
//! tensor `u32` rows, `u32` cols and row-major little-endian `f32` values.
//! A JSON sidecar (same stem, `.json`) carries architecture and training
//! metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::classifier::{ClassifierArch, LatentClassifier};
use super::encoder::{Encoder, EncoderConfig};
use super::nn::{Activation, Dense, Mlp};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"IVDCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderMeta {
    pub format_version: u32,
    pub encoder: EncoderConfig,
    /// `"scl"` or `"supervised"`.
    pub objective: String,
    pub seed: u64,
    pub train: serde_json::Value,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMeta {
    pub format_version: u32,
    pub arch: ClassifierArch,
    pub n_in: usize,
    pub threshold: f64,
    pub seed: u64,
    pub loss_trace: Vec<f64>,
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

pub fn write_tensors(path: &Path, shapes: &[(usize, usize)], tensors: &[&[f64]]) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (&(rows, cols), t) in shapes.iter().zip(tensors) {
        debug_assert_eq!(rows * cols, t.len());
        bytes.extend_from_slice(&(rows as u32).to_le_bytes());
        bytes.extend_from_slice(&(cols as u32).to_le_bytes());
        for &v in t.iter() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub type Tensor = (usize, usize, Vec<f64>);

pub fn read_tensors(path: &Path) -> Result<Vec<Tensor>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::data(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let u32_at = |i: usize| -> Result<u32> {
        bytes
            .get(i..i + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| bad("truncated"))
    };
    let version = u32_at(8)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported checkpoint version {version}")));
    }
    let n = u32_at(12)? as usize;
    let mut pos = 16;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let rows = u32_at(pos)? as usize;
        let cols = u32_at(pos + 4)? as usize;
        pos += 8;
        let len = rows * cols;
        let body = bytes.get(pos..pos + 4 * len).ok_or_else(|| bad("truncated"))?;
        let vals = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        out.push((rows, cols, vals));
        pos += 4 * len;
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Rebuilds dense layers from `(w, b)` tensor pairs.
fn mlp_from(tensors: &mut impl Iterator<Item = Tensor>, n_layers: usize, last: Activation) -> Result<Mlp> {
    let mut layers = Vec::with_capacity(n_layers);
    for i in 0..n_layers {
        let (wr, wc, w) = tensors.next().ok_or_else(|| Error::data("checkpoint has too few tensors"))?;
        let (br, bc, b) = tensors.next().ok_or_else(|| Error::data("checkpoint has too few tensors"))?;
        if br != 1 || bc != wc {
            return Err(Error::data(format!("layer {i}: bias shape {br}x{bc} does not match weight {wr}x{wc}")));
        }
        let act = if i + 1 == n_layers { last } else { Activation::Relu };
        layers.push(Dense {
            w: ndarray::Array2::from_shape_vec((wr, wc), w).map_err(|e| Error::data(e.to_string()))?,
            b: ndarray::Array1::from(b),
            act,
        });
    }
    Ok(Mlp { layers })
}

pub fn save_encoder(path: &Path, enc: &Encoder, meta: &EncoderMeta) -> Result<()> {
    write_tensors(path, &enc.tensor_shapes(), &enc.tensors())?;
    write_json(&sidecar_path(path), meta)
}

pub fn load_encoder(path: &Path) -> Result<(Encoder, EncoderMeta)> {
    let meta: EncoderMeta = read_json(&sidecar_path(path))?;
    meta.encoder.validate()?;
    let mut tensors = read_tensors(path)?.into_iter();
    let n_backbone = meta.encoder.hidden_sizes.len() + 1;
    let backbone = mlp_from(&mut tensors, n_backbone, Activation::Relu)?;
    let projector = mlp_from(&mut tensors, 1, Activation::Identity)?;
    if tensors.next().is_some() {
        return Err(Error::data(format!("{}: more tensors than the architecture", path.display())));
    }
    let enc = Encoder {
        config: meta.encoder.clone(),
        backbone,
        projector,
    };
    let mut expected = vec![meta.encoder.pooled_len()];
    expected.extend(&meta.encoder.hidden_sizes);
    expected.push(meta.encoder.embed_dim);
    let got: Vec<usize> = std::iter::once(enc.backbone.n_in())
        .chain(enc.backbone.layers.iter().map(|l| l.n_out()))
        .collect();
    if got != expected || enc.projector.n_in() != meta.encoder.embed_dim || enc.projector.n_out() != meta.encoder.proj_dim {
        return Err(Error::data(format!("{}: layer sizes do not match the sidecar config", path.display())));
    }
    Ok((enc, meta))
}

pub fn save_classifier(path: &Path, clf: &LatentClassifier, meta: &ClassifierMeta) -> Result<()> {
    write_tensors(path, &clf.net.tensor_shapes(), &clf.net.tensors())?;
    write_json(&sidecar_path(path), meta)
}

pub fn load_classifier(path: &Path) -> Result<(LatentClassifier, ClassifierMeta)> {
    let meta: ClassifierMeta = read_json(&sidecar_path(path))?;
    let n_layers = match meta.arch {
        ClassifierArch::Linear => 1,
        ClassifierArch::Mlp => 2,
    };
    let mut tensors = read_tensors(path)?.into_iter();
    let net = mlp_from(&mut tensors, n_layers, Activation::Identity)?;
    if tensors.next().is_some() || net.n_in() != meta.n_in || net.n_out() != 1 {
        return Err(Error::data(format!("{}: tensors do not match the sidecar", path.display())));
    }
    Ok((LatentClassifier { arch: meta.arch, net }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc_meta(enc: &Encoder) -> EncoderMeta {
        EncoderMeta {
            format_version: CHECKPOINT_VERSION,
            encoder: enc.config.clone(),
            objective: "scl".into(),
            seed: 7,
            train: serde_json::json!({"lr": 1e-4}),
            loss_trace: vec![1.5, 1.25],
        }
    }

    #[test]
    fn encoder_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = EncoderConfig {
            input_dims: (8, 8),
            grid: (4, 4),
            hidden_sizes: vec![12, 10],
            embed_dim: 6,
            ..EncoderConfig::default()
        };
        let mut enc = Encoder::new(cfg, 7).unwrap();
        enc.round_to_f32();
        let p = dir.path().join("ck/encoder.bin");
        save_encoder(&p, &enc, &enc_meta(&enc)).unwrap();
        let (back, meta) = load_encoder(&p).unwrap();
        assert_eq!(back, enc);
        assert_eq!(meta, enc_meta(&enc));
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"IVDCKPT\0");
        let n_params: usize = enc.tensors().iter().map(|t| t.len()).sum();
        assert_eq!(bytes.len(), 16 + 8 * 8 + 4 * n_params);
    }

    #[test]
    fn classifier_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let mut clf = LatentClassifier::new(ClassifierArch::Mlp, 64, 1);
        clf.net.round_to_f32();
        let meta = ClassifierMeta {
            format_version: CHECKPOINT_VERSION,
            arch: ClassifierArch::Mlp,
            n_in: 64,
            threshold: 0.5,
            seed: 1,
            loss_trace: vec![],
        };
        let p = dir.path().join("classifier.bin");
        save_classifier(&p, &clf, &meta).unwrap();
        assert_eq!(load_classifier(&p).unwrap().0, clf);

        let mut bytes = std::fs::read(&p).unwrap();
        bytes.pop();
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(load_classifier(&p), Err(Error::Data(_))));
        assert!(matches!(
            load_classifier(&dir.path().join("none.bin")),
            Err(Error::MissingFile(_))
        ));
    }
}
