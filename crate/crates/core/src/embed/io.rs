//! FEAT1 feature files and FMDMODEL1 model files.
//!
//! ```text
//! FEAT1 <n> <d>
//! <d reals>                     × n lines
//!
//! FMDMODEL1 <H> <W> <d>
//! <mean image: H·W·3 reals>
//! <component: H·W·3 reals>      × d lines
//! <explained variance: d reals>
//! CRC32 <8 hex digits over every preceding byte>
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{EmbedderModel, FeatureVector};
use crate::textfmt::{parse_row, parse_usize, push_reals, Lines};
use crate::{Error, Result};

const FEAT_MAGIC: &str = "FEAT1";
const MODEL_MAGIC: &str = "FMDMODEL1";

pub fn write_feat1(dim: usize, features: &[FeatureVector]) -> Result<String> {
    if let Some(bad) = features.iter().find(|f| f.dim() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "feature of dimension {} in a FEAT1 file of dimension {dim}",
            bad.dim()
        )));
    }
    let mut out = format!("{FEAT_MAGIC} {} {dim}\n", features.len());
    for f in features {
        push_reals(&mut out, f.values());
    }
    Ok(out)
}

pub fn read_feat1(text: &str) -> Result<Vec<FeatureVector>> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.header(&mut Vec::new())?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&FEAT_MAGIC) || fields.len() != 3 {
        return Err(Error::parse(ln, "header must be `FEAT1 <n> <d>`"));
    }
    let n = parse_usize(fields[1], ln, "vector count")?;
    let d = parse_usize(fields[2], ln, "dimension")?;
    if d == 0 {
        return Err(Error::parse(ln, "dimension must be ≥ 1"));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, row) = lines.expect_line("a feature row")?;
        let values = parse_row(row, ln, None)?;
        if values.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "line {ln}: {} values in a FEAT1 file of dimension {d}",
                values.len()
            )));
        }
        out.push(FeatureVector::new(values)?);
    }
    lines.finish()?;
    Ok(out)
}

pub fn import_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    read_feat1(&fs::read_to_string(path)?)
}

pub fn export_features(dim: usize, features: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_feat1(dim, features)?)?;
    Ok(())
}

pub fn write_model(model: &EmbedderModel) -> String {
    use crate::embed::Embedder;
    let (h, w) = model.input_shape();
    let mut out = format!("{MODEL_MAGIC} {h} {w} {}\n", model.latent_dim());
    push_reals(&mut out, model.mean_image());
    for i in 0..model.latent_dim() {
        push_reals(&mut out, &model.component(i));
    }
    push_reals(&mut out, model.explained_variance());
    let crc = crc32fast::hash(out.as_bytes());
    out.push_str(&format!("CRC32 {crc:08x}\n"));
    out
}

pub fn read_model(text: &str) -> Result<EmbedderModel> {
    let body_end = text
        .trim_end_matches(['\n', '\r'])
        .rfind('\n')
        .map_or(0, |i| i + 1);
    let total_lines = text.lines().count();
    let crc_line = text[body_end..].trim();
    let expected = crc_line
        .strip_prefix("CRC32 ")
        .and_then(|h| u32::from_str_radix(h.trim(), 16).ok())
        .ok_or_else(|| Error::parse(total_lines.max(1), "missing `CRC32 <hex>` trailer"))?;
    let body = &text[..body_end];
    let actual = crc32fast::hash(body.as_bytes());
    if actual != expected {
        return Err(Error::ChecksumMismatch { expected, actual });
    }

    let mut lines = Lines::new(body);
    let (ln, header) = lines.header(&mut Vec::new())?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MODEL_MAGIC) || fields.len() != 4 {
        return Err(Error::parse(ln, "header must be `FMDMODEL1 <H> <W> <d>`"));
    }
    let h = parse_usize(fields[1], ln, "height")?;
    let w = parse_usize(fields[2], ln, "width")?;
    let d = parse_usize(fields[3], ln, "latent dimension")?;
    let len = h * w * 3;
    let (ln, row) = lines.expect_line("mean image")?;
    let mean = parse_row(row, ln, Some(len))?;
    let mut comps = Vec::with_capacity(d * len);
    for _ in 0..d {
        let (ln, row) = lines.expect_line("a component row")?;
        comps.extend(parse_row(row, ln, Some(len))?);
    }
    let (ln, row) = lines.expect_line("explained variance")?;
    let variance = parse_row(row, ln, Some(d))?;
    lines.finish()?;
    EmbedderModel::new(h, w, mean, DMatrix::from_row_slice(d, len, &comps), variance)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbedderModel> {
    read_model(&fs::read_to_string(path)?)
}

pub fn save_model(model: &EmbedderModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_model(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{fit_pca, Embedder};
    use crate::imaging::MotionImage;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> (EmbedderModel, MotionImage) {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let imgs: Vec<MotionImage> = (0..25)
            .map(|_| MotionImage::new(2, 5, (0..30).map(|_| rng.random()).collect()).unwrap())
            .collect();
        (fit_pca(&imgs, 7).unwrap(), imgs[0].clone())
    }

    #[test]
    fn model_round_trip_is_exact() {
        let (m, img) = model();
        let back = read_model(&write_model(&m)).unwrap();
        assert_eq!(back, m);
        let (a, b) = (m.embed(&img).unwrap(), back.embed(&img).unwrap());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn truncated_model_is_a_parse_error() {
        let (m, _) = model();
        let text = write_model(&m);
        let cut = &text[..text.len() / 2];
        assert!(matches!(read_model(cut), Err(Error::Parse { .. })));
        assert!(matches!(read_model(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn corrupted_model_fails_checksum() {
        let (m, _) = model();
        let text = write_model(&m);
        let pos = text.find('\n').unwrap() + 3;
        let mut bytes = text.into_bytes();
        bytes[pos] = if bytes[pos] == b'1' { b'2' } else { b'1' };
        let corrupted = String::from_utf8(bytes).unwrap();
        assert!(matches!(
            read_model(&corrupted),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn features_round_trip() {
        let f = vec![
            FeatureVector::new(vec![1.0 / 3.0, -2e-9, 7.0]).unwrap(),
            FeatureVector::new(vec![0.0, 1e300, -0.1]).unwrap(),
        ];
        assert_eq!(read_feat1(&write_feat1(3, &f).unwrap()).unwrap(), f);
        assert!(write_feat1(2, &f).is_err());
    }

    #[test]
    fn short_feature_row_is_dimension_mismatch() {
        let row: Vec<String> = (0..63).map(|i| i.to_string()).collect();
        let text = format!("FEAT1 1 64\n{}\n", row.join(" "));
        assert!(matches!(read_feat1(&text), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn empty_feature_file() {
        assert!(read_feat1("FEAT1 0 4\n").unwrap().is_empty());
        assert!(matches!(read_feat1("FEAT1 2 1\n0.5\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            read_feat1("FEAT1 1 1\n0.5\n0.5\n"),
            Err(Error::Parse { .. })
        ));
    }
}
