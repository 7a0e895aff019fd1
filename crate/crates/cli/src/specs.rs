//! Ablation spec files: tab-separated `name em pos ner tfidf aligned`
//! rows with a header, round-trippable with the table3 preset.

use anyhow::{anyhow, Result};
use std::fmt::Write as _;
use tqr_core::evaluation::AblationSpec;
use tqr_core::reader::FeatureMask;

pub const HEADER: &str = "name\tuse_exact_match\tuse_pos\tuse_ner\tuse_tfidf\tuse_aligned";

pub fn specs_to_tsv(specs: &[AblationSpec]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for s in specs {
        let m = &s.mask;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.name, m.use_exact_match, m.use_pos, m.use_ner, m.use_tfidf, m.use_aligned
        );
    }
    out
}

pub fn specs_from_tsv(text: &str) -> Result<Vec<AblationSpec>> {
    let mut specs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') || line == HEADER {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(anyhow!(
                "spec file line {}: expected 6 tab-separated columns, got {}",
                idx + 1,
                cols.len()
            ));
        }
        let flag = |s: &str| -> Result<bool> {
            s.parse::<bool>()
                .map_err(|_| anyhow!("spec file line {}: bad boolean '{s}'", idx + 1))
        };
        specs.push(AblationSpec::new(
            cols[0],
            FeatureMask {
                use_exact_match: flag(cols[1])?,
                use_pos: flag(cols[2])?,
                use_ner: flag(cols[3])?,
                use_tfidf: flag(cols[4])?,
                use_aligned: flag(cols[5])?,
            },
        ));
    }
    if specs.is_empty() {
        return Err(anyhow!("spec file contains no specs"));
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tqr_core::evaluation::table3_specs;

    #[test]
    fn table3_round_trips() {
        let specs = table3_specs();
        let parsed = specs_from_tsv(&specs_to_tsv(&specs)).unwrap();
        assert_eq!(parsed, specs);
    }
}
