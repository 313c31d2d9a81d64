//! Source-case selection from the corpus metadata CSV.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewPosition {
    /// Anterior-posterior, the portable ICU projection.
    Ap,
    Pa,
    Other,
}

impl ViewPosition {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_uppercase().as_str() {
            "AP" => ViewPosition::Ap,
            "PA" => ViewPosition::Pa,
            _ => ViewPosition::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRecord {
    /// Image file name without its extension.
    pub case_id: String,
    /// Image file name as listed in the metadata.
    pub image_index: String,
    pub view_position: ViewPosition,
}

impl CaseRecord {
    pub fn image_path(&self, images_dir: &Path) -> PathBuf {
        images_dir.join(&self.image_index)
    }

    pub fn clavicle_mask_path(&self, masks_dir: &Path) -> PathBuf {
        masks_dir.join(format!("{}_clavicle.png", self.case_id))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CaseFilter {
    /// Keep only this view; `None` keeps everything.
    pub view: Option<ViewPosition>,
    /// Case ids (or image file names) to drop.
    pub exclude: HashSet<String>,
}

impl CaseFilter {
    pub fn ap_only() -> Self {
        CaseFilter {
            view: Some(ViewPosition::Ap),
            exclude: HashSet::new(),
        }
    }

    /// Read an exclusion list: one id per line, blank lines and `#` comments ignored.
    pub fn with_exclusions_from(mut self, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.exclude.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| strip_extension(l).to_owned()),
        );
        Ok(self)
    }

    fn keeps(&self, rec: &CaseRecord) -> bool {
        self.view.is_none_or(|v| v == rec.view_position) && !self.exclude.contains(&rec.case_id)
    }
}

fn strip_extension(name: &str) -> &str {
    Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name)
}

/// Header names are matched ignoring case, spaces and underscores, so both
/// `Image Index` and `image_index` work.
fn normalize_header(h: &str) -> String {
    h.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Records that pass `filter`, in file order.
pub fn select_cases(metadata_csv: &Path, filter: &CaseFilter) -> Result<Vec<CaseRecord>> {
    let csv_err = |source| Error::Csv {
        path: metadata_csv.to_owned(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(metadata_csv)
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        // an empty file has no rows to select
        return Ok(Vec::new());
    }
    let find = |name: &str| headers.iter().position(|h| normalize_header(h) == name);
    let (index_col, view_col) = match (find("imageindex"), find("viewposition")) {
        (Some(i), Some(v)) => (i, v),
        (i, v) => {
            let mut missing = Vec::new();
            if i.is_none() {
                missing.push("Image Index".to_owned());
            }
            if v.is_none() {
                missing.push("View Position".to_owned());
            }
            return Err(Error::Schema {
                path: metadata_csv.to_owned(),
                missing,
            });
        }
    };

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let image_index = row.get(index_col).unwrap_or("").trim();
        if image_index.is_empty() {
            continue;
        }
        let rec = CaseRecord {
            case_id: strip_extension(image_index).to_owned(),
            image_index: image_index.to_owned(),
            view_position: ViewPosition::parse(row.get(view_col).unwrap_or("")),
        };
        if filter.keeps(&rec) {
            out.push(rec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("meta.csv");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn keeps_ap_rows_in_order() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "Image Index,Finding Labels,View Position\n\
             a.png,No Finding,AP\nb.png,Effusion,PA\nc.png,No Finding,AP\n\
             d.png,x,PA\ne.png,y,AP\n",
        );
        let recs = select_cases(&p, &CaseFilter::ap_only()).unwrap();
        let ids: Vec<_> = recs.iter().map(|r| r.case_id.as_str()).collect();
        assert_eq!(ids, ["a", "c", "e"]);
        assert_eq!(recs[0].image_index, "a.png");
    }

    #[test]
    fn empty_csv_is_empty_list() {
        let d = tempfile::tempdir().unwrap();
        assert!(select_cases(&write(d.path(), ""), &CaseFilter::ap_only())
            .unwrap()
            .is_empty());
        let header_only = write(d.path(), "Image Index,View Position\n");
        assert!(select_cases(&header_only, &CaseFilter::ap_only())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_view_is_other_and_excluded() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "image_index,view_position\na.png,LL\nb.png,ap\n");
        let all = select_cases(&p, &CaseFilter::default()).unwrap();
        assert_eq!(all[0].view_position, ViewPosition::Other);
        let ap = select_cases(&p, &CaseFilter::ap_only()).unwrap();
        assert_eq!(ap.len(), 1);
        assert_eq!(ap[0].case_id, "b");
    }

    #[test]
    fn missing_columns_are_named() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "Image Index,Patient Age\na.png,50\n");
        match select_cases(&p, &CaseFilter::ap_only()) {
            Err(Error::Schema { missing, .. }) => assert_eq!(missing, ["View Position"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exclusion_list() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "Image Index,View Position\na.png,AP\nb.png,AP\nc.png,AP\n",
        );
        let ex = d.path().join("ex.txt");
        fs::write(&ex, "# known tubes\nb.png\n\n").unwrap();
        let f = CaseFilter::ap_only().with_exclusions_from(&ex).unwrap();
        let ids: Vec<_> = select_cases(&p, &f)
            .unwrap()
            .into_iter()
            .map(|r| r.case_id)
            .collect();
        assert_eq!(ids, ["a", "c"]);
    }
}
