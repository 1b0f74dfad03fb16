//! One 16-bit PCM WAV file per channel plus a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mix::MultichannelAudio;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub index: usize,
    pub mic_id: u32,
    /// Path relative to the manifest's directory.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioManifest {
    pub sr: u32,
    pub channels: Vec<ChannelEntry>,
}

pub fn write_wav_mono(path: &Path, samples: &[f32], sr: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sr,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    {
        let mut iw = w.get_i16_writer(samples.len() as u32);
        for &s in samples {
            iw.write_sample(to_pcm16(s));
        }
        iw.flush()?;
    }
    w.finalize()?;
    Ok(())
}

pub fn to_pcm16(s: f32) -> i16 {
    (s.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

pub fn read_wav_mono(path: &Path) -> Result<(Vec<f32>, u32)> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = hound::WavReader::open(path)?;
    let spec = r.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::data(format!("{}: expected mono 16-bit PCM", path.display())));
    }
    let samples = r
        .samples::<i16>()
        .map(|s| s.map(|v| v as f32 / 32767.0))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((samples, spec.sample_rate))
}

/// Writes `dir/ch_<i>.wav` for each channel and `dir/manifest.json`.
pub fn write_multichannel(dir: &Path, audio: &MultichannelAudio) -> Result<AudioManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut channels = Vec::with_capacity(audio.n_channels());
    for (i, (samples, &mic_id)) in audio.channels.iter().zip(&audio.mic_ids).enumerate() {
        let name = format!("ch_{i}.wav");
        write_wav_mono(&dir.join(&name), samples, audio.sr)?;
        channels.push(ChannelEntry {
            index: i,
            mic_id,
            path: name,
        });
    }
    let manifest = AudioManifest { sr: audio.sr, channels };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn channel_path(dir: &Path, entry: &ChannelEntry) -> PathBuf {
    dir.join(&entry.path)
}

pub fn read_multichannel(dir: &Path) -> Result<MultichannelAudio> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: AudioManifest = serde_json::from_str(&text)?;
    let mut channels = Vec::new();
    let mut mic_ids = Vec::new();
    for entry in &manifest.channels {
        let (samples, sr) = read_wav_mono(&channel_path(dir, entry))?;
        if sr != manifest.sr {
            return Err(Error::data(format!("{}: sample rate {sr} != {}", entry.path, manifest.sr)));
        }
        channels.push(samples);
        mic_ids.push(entry.mic_id);
    }
    let audio = MultichannelAudio {
        sr: manifest.sr,
        mic_ids,
        channels,
    };
    audio.validate()?;
    Ok(audio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_roundtrip_quantises_to_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let audio = MultichannelAudio {
            sr: 48_000,
            mic_ids: vec![10, 11],
            channels: vec![vec![0.0, 0.5, -1.0, 1.0], vec![0.25, -0.25, 0.1, 0.0]],
        };
        let m = write_multichannel(dir.path(), &audio).unwrap();
        assert_eq!(m.channels[1].mic_id, 11);
        let back = read_multichannel(dir.path()).unwrap();
        assert_eq!(back.mic_ids, audio.mic_ids);
        for (a, b) in back.channels.iter().flatten().zip(audio.channels.iter().flatten()) {
            assert!((a - b).abs() <= 0.5 / 32767.0 + 1e-7);
        }
        let bytes = std::fs::read(dir.path().join("ch_0.wav")).unwrap();
        assert_eq!(&bytes[..4], b"RIFF");
        assert_eq!(bytes.len(), 44 + 2 * 4);
    }

    #[test]
    fn missing_channel_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_wav_mono(&dir.path().join("nope.wav")), Err(Error::MissingFile(_))));
    }
}
