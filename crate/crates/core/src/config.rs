//! Line-oriented `key = value` settings shared by the CLI and config files.
//!
//! ```text
//! # comments start with '#'
//! basis = krawtchouk
//! patch_size = 12
//! ratios = 0.1, 0.2, 0.3
//! no_resize = true
//! ```
//!
//! Keys accept `-` or `_`. Every field is optional so a file layer and a
//! command-line layer can be merged, the later layer winning.

use std::path::PathBuf;
use std::str::FromStr;

use crate::basis::BasisKind;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub basis: Option<BasisKind>,
    pub bases: Option<Vec<BasisKind>>,
    pub patch_size: Option<usize>,
    pub stride: Option<usize>,
    pub ratio: Option<f64>,
    pub ratios: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub stop_gain: Option<f64>,
    pub max_atoms: Option<usize>,
    pub no_resize: Option<bool>,
    pub out: Option<PathBuf>,
    pub gap: Option<usize>,
    pub no_timing: Option<bool>,
    pub no_clamp: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("line {line}: bad value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s, line))
        .collect()
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::invalid(format!(
            "line {line}: '{key}' expects a boolean, got '{value}'"
        ))),
    }
}

fn parse_basis(value: &str, line: usize) -> Result<BasisKind> {
    value
        .parse()
        .map_err(|e: Error| Error::invalid(format!("line {line}: {e}")))
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {line}: expected 'key = value'")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            s.set(&key, value, line)?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "basis" => self.basis = Some(parse_basis(value, line)?),
            "bases" => {
                self.bases = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|b| parse_basis(b, line))
                        .collect::<Result<_>>()?,
                )
            }
            "patch_size" => self.patch_size = Some(parse_value(key, value, line)?),
            "stride" => self.stride = Some(parse_value(key, value, line)?),
            "ratio" => self.ratio = Some(parse_value(key, value, line)?),
            "ratios" => self.ratios = Some(parse_list(key, value, line)?),
            "seed" => self.seed = Some(parse_value(key, value, line)?),
            "seeds" => self.seeds = Some(parse_list(key, value, line)?),
            "p1" => self.p1 = Some(parse_value(key, value, line)?),
            "p2" => self.p2 = Some(parse_value(key, value, line)?),
            "stop_gain" => self.stop_gain = Some(parse_value(key, value, line)?),
            "max_atoms" => self.max_atoms = Some(parse_value(key, value, line)?),
            "no_resize" => self.no_resize = Some(parse_bool(key, value, line)?),
            "resize" => self.no_resize = Some(!parse_bool(key, value, line)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "gap" => self.gap = Some(parse_value(key, value, line)?),
            "no_timing" => self.no_timing = Some(parse_bool(key, value, line)?),
            "no_clamp" => self.no_clamp = Some(parse_bool(key, value, line)?),
            other => return Err(Error::invalid(format!("line {line}: unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            basis: over.basis.or(self.basis),
            bases: over.bases.or(self.bases),
            patch_size: over.patch_size.or(self.patch_size),
            stride: over.stride.or(self.stride),
            ratio: over.ratio.or(self.ratio),
            ratios: over.ratios.or(self.ratios),
            seed: over.seed.or(self.seed),
            seeds: over.seeds.or(self.seeds),
            p1: over.p1.or(self.p1),
            p2: over.p2.or(self.p2),
            stop_gain: over.stop_gain.or(self.stop_gain),
            max_atoms: over.max_atoms.or(self.max_atoms),
            no_resize: over.no_resize.or(self.no_resize),
            out: over.out.or(self.out),
            gap: over.gap.or(self.gap),
            no_timing: over.no_timing.or(self.no_timing),
            no_clamp: over.no_clamp.or(self.no_clamp),
        }
    }

    /// Pipeline configuration with unset fields at their defaults.
    pub fn pipeline(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            patch_size: self.patch_size.unwrap_or(d.patch_size),
            stride: self.stride.unwrap_or(d.stride),
            resize_to: if self.no_resize.unwrap_or(false) {
                None
            } else {
                d.resize_to
            },
            stop_gain: self.stop_gain.unwrap_or(d.stop_gain),
            max_atoms: self.max_atoms.unwrap_or(d.max_atoms),
            basis: self.basis.unwrap_or(d.basis),
            p1: self.p1.unwrap_or(d.p1),
            p2: self.p2.unwrap_or(d.p2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_merge() {
        let file = Settings::parse(
            "# run config\nbasis = krawtchouk\npatch-size = 8\nratios = 0.1, 0.3\n\nno_resize = yes # trailing\nseeds=1,2,3\n",
        )
        .unwrap();
        assert_eq!(file.basis, Some(BasisKind::Krawtchouk { p: 0.5 }));
        assert_eq!(file.patch_size, Some(8));
        assert_eq!(file.ratios, Some(vec![0.1, 0.3]));
        assert_eq!(file.seeds, Some(vec![1, 2, 3]));
        assert_eq!(file.no_resize, Some(true));

        let flags = Settings {
            patch_size: Some(10),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.patch_size, Some(10));
        assert_eq!(merged.basis, Some(BasisKind::Krawtchouk { p: 0.5 }));
        let cfg = merged.pipeline();
        assert_eq!(cfg.patch_size, 10);
        assert_eq!(cfg.resize_to, None);
        assert_eq!(cfg.max_atoms, 36);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Settings::parse("stride = 2\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("bogus"), "{e}");
        assert!(Settings::parse("stride 2").is_err());
        assert!(Settings::parse("stride = -2").is_err());
        assert!(Settings::parse("basis = wavelet").is_err());
        assert!(Settings::parse("no_resize = maybe").is_err());
    }

    #[test]
    fn defaults() {
        assert_eq!(Settings::default().pipeline(), PipelineConfig::default());
    }
}
