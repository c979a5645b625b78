//! Labeled datasets: CSV import, pair export with Roman-numeral filenames,
//! and the feature CSV.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::selection::{LabeledMatrix, SelectionError};
use crate::stylometry::{Feature, FeatureVector};
use crate::textcore::TokenMode;

/// Binary provenance label: 0 for source text, 1 for anonymized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Nanon,
    Anon,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::Nanon => 0,
            Label::Anon => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Label::Nanon),
            1 => Some(Label::Anon),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Nanon => "NANON",
            Label::Anon => "ANON",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index() as u8)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Label::from_index(v).ok_or_else(|| serde::de::Error::custom(format!("label must be 0 or 1, got {v}")))
    }
}

fn parse_label(s: &str) -> Option<Label> {
    match s.trim() {
        "0" => Some(Label::Nanon),
        "1" => Some(Label::Anon),
        _ => None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("bad header in {}: expected {expected}, found `{found}`", path.display())]
    BadHeader {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    /// Data row numbers start at 1 after the header.
    #[error("bad label `{value}` in row {row}")]
    BadLabel { row: usize, value: String },
    #[error("duplicate text_id `{0}`")]
    DuplicateId(String),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("roman numerals cover 1..=3999, got {0}")]
    OutOfRange(usize),
    #[error("bad value in row {row}, column {column}: {message}")]
    BadValue {
        row: usize,
        column: String,
        message: String,
    },
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub text_id: String,
    pub label: Label,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_index: usize,
    pub nanon: LabeledRecord,
    pub anon: LabeledRecord,
}

pub fn synth_id(row: usize) -> String {
    format!("rec_{row:05}")
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>, CorpusError> {
    if !path.is_file() {
        return Err(CorpusError::MissingFile(path.to_path_buf()));
    }
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file))
}

/// Reads a `label,text` dataset (ids are synthesized in row order) or a
/// `text_id,label,text` dataset (ids must be unique).
pub fn import_csv(path: &Path) -> Result<Vec<LabeledRecord>, CorpusError> {
    let mut rdr = open_reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let explicit = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["label", "text"] => false,
        ["text_id", "label", "text"] => true,
        _ => {
            return Err(CorpusError::BadHeader {
                path: path.to_path_buf(),
                expected: "label,text",
                found: header.join(","),
            })
        }
    };
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let n = i + 1;
        let (id, label, text) = if explicit {
            (row[0].to_string(), &row[1], &row[2])
        } else {
            (synth_id(n), &row[0], &row[1])
        };
        let label = parse_label(label).ok_or_else(|| CorpusError::BadLabel {
            row: n,
            value: label.to_string(),
        })?;
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        out.push(LabeledRecord {
            text_id: id,
            label,
            text: text.to_string(),
        });
    }
    Ok(out)
}

/// Writes records as `text_id,label,text`, which [`import_csv`] reads back unchanged.
pub fn write_records(records: &[LabeledRecord], path: &Path) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["text_id", "label", "text"])?;
    for r in records {
        w.write_record([r.text_id.as_str(), &r.label.to_string(), r.text.as_str()])?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes records in the plain two-column `label,text` layout.
pub fn write_dataset<W: io::Write>(records: &[LabeledRecord], out: W) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "text"])?;
    for r in records {
        w.write_record([r.label.to_string().as_str(), r.text.as_str()])?;
    }
    w.flush().map_err(|e| CorpusError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })
}

/// Reads `pair_id,nanon_text,anon_text`.
pub fn import_pairs(path: &Path) -> Result<Vec<PairRecord>, CorpusError> {
    let mut rdr = open_reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["pair_id", "nanon_text", "anon_text"] {
        return Err(CorpusError::BadHeader {
            path: path.to_path_buf(),
            expected: "pair_id,nanon_text,anon_text",
            found: header.join(","),
        });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let id = row[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        out.push(PairRecord {
            pair_index: i + 1,
            nanon: LabeledRecord {
                text_id: format!("{id}_nanon"),
                label: Label::Nanon,
                text: row[1].to_string(),
            },
            anon: LabeledRecord {
                text_id: format!("{id}_anon"),
                label: Label::Anon,
                text: row[2].to_string(),
            },
        });
    }
    Ok(out)
}

pub fn write_pairs(pairs: &[PairRecord], path: &Path) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pair_id", "nanon_text", "anon_text"])?;
    for p in pairs {
        w.write_record([
            to_roman(p.pair_index)?.as_str(),
            p.nanon.text.as_str(),
            p.anon.text.as_str(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn to_roman(n: usize) -> Result<String, CorpusError> {
    if !(1..=3999).contains(&n) {
        return Err(CorpusError::OutOfRange(n));
    }
    const TABLE: [(usize, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut rest = n;
    let mut out = String::new();
    for (value, glyph) in TABLE {
        while rest >= value {
            out.push_str(glyph);
            rest -= value;
        }
    }
    Ok(out)
}

/// Filenames for pair `k`: odd suffix for the source text, even for the anonymized one.
pub fn pair_filenames(k: usize) -> Result<(String, String), CorpusError> {
    let roman = to_roman(k)?;
    Ok((
        format!("{roman}_data_point_{:03}.txt", 2 * k - 1),
        format!("{roman}_data_point_{:03}.txt", 2 * k),
    ))
}

/// Writes each pair as two text files named after [`pair_filenames`].
/// Texts are written byte-for-byte, hidden characters included.
pub fn export_pairs(pairs: &[PairRecord], dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        let (odd, even) = pair_filenames(p.pair_index)?;
        for (name, rec) in [(odd, &p.nanon), (even, &p.anon)] {
            let path = dir.join(name);
            fs::write(&path, rec.text.as_bytes()).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Pairs consecutive NANON / ANON records: the i-th source record with the i-th anonymized one.
pub fn pair_up(records: &[LabeledRecord]) -> Vec<PairRecord> {
    let nanon = records.iter().filter(|r| r.label == Label::Nanon);
    let anon = records.iter().filter(|r| r.label == Label::Anon);
    nanon
        .zip(anon)
        .enumerate()
        .map(|(i, (n, a))| PairRecord {
            pair_index: i + 1,
            nanon: n.clone(),
            anon: a.clone(),
        })
        .collect()
}

pub const FEATURE_HEADER: [&str; 11] = [
    "text_id",
    "label",
    "mode",
    "l_cont_a",
    "l_func_a",
    "l_cont_t",
    "l_func_t",
    "ttr_lemmas",
    "word_ttr",
    "token_count",
    "type_count",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub text_id: String,
    pub features: FeatureVector,
}

pub fn write_feature_csv<W: io::Write>(rows: &[FeatureRow], out: W) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FEATURE_HEADER)?;
    for r in rows {
        let f = &r.features;
        let label = f.label.map(|l| l.to_string()).unwrap_or_default();
        let mut rec = vec![r.text_id.clone(), label, f.mode.to_string()];
        rec.extend(f.retained().iter().chain([&f.word_ttr]).map(|v| format!("{v:.4}")));
        rec.push(f.token_count.to_string());
        rec.push(f.type_count.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CorpusError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, n: usize, i: usize) -> Result<T, CorpusError>
where
    T::Err: fmt::Display,
{
    row[i].trim().parse().map_err(|e: T::Err| CorpusError::BadValue {
        row: n,
        column: FEATURE_HEADER[i].to_string(),
        message: e.to_string(),
    })
}

pub fn read_feature_csv(path: &Path) -> Result<Vec<FeatureRow>, CorpusError> {
    let mut rdr = open_reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != FEATURE_HEADER {
        return Err(CorpusError::BadHeader {
            path: path.to_path_buf(),
            expected: "text_id,label,mode,l_cont_a,...,type_count",
            found: header.join(","),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let n = i + 1;
        let label = match row[1].trim() {
            "" => None,
            s => Some(parse_label(s).ok_or_else(|| CorpusError::BadLabel {
                row: n,
                value: s.to_string(),
            })?),
        };
        let mode: TokenMode = field(&row, n, 2)?;
        let token_count: usize = field(&row, n, 9)?;
        out.push(FeatureRow {
            text_id: row[0].to_string(),
            features: FeatureVector {
                l_cont_a: field(&row, n, 3)?,
                l_func_a: field(&row, n, 4)?,
                l_cont_t: field(&row, n, 5)?,
                l_func_t: field(&row, n, 6)?,
                ttr_lemmas: field(&row, n, 7)?,
                word_ttr: field(&row, n, 8)?,
                token_count,
                type_count: field(&row, n, 10)?,
                label,
                mode,
                empty: token_count == 0,
            },
        });
    }
    Ok(out)
}

/// The five retained features of labeled rows, in feature-CSV column order.
pub fn feature_matrix(rows: &[FeatureRow]) -> Result<LabeledMatrix, CorpusError> {
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let label = r.features.label.ok_or_else(|| CorpusError::BadLabel {
            row: i + 1,
            value: String::new(),
        })?;
        xs.push(r.features.retained());
        ys.push(label);
    }
    let names = Feature::ALL.iter().map(|f| f.column().to_string()).collect();
    Ok(LabeledMatrix::new(names, xs, ys)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmpfile(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    /// Subtractive Roman numerals built digit by digit.
    fn oracle_roman(n: usize) -> String {
        let ones = ["", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"];
        let tens = ["", "X", "XX", "XXX", "XL", "L", "LX", "LXX", "LXXX", "XC"];
        let hundreds = ["", "C", "CC", "CCC", "CD", "D", "DC", "DCC", "DCCC", "CM"];
        let thousands = ["", "M", "MM", "MMM"];
        format!(
            "{}{}{}{}",
            thousands[n / 1000],
            hundreds[n / 100 % 10],
            tens[n / 10 % 10],
            ones[n % 10]
        )
    }

    #[test]
    fn roman_numerals() {
        assert_eq!(to_roman(1).unwrap(), "I");
        assert_eq!(to_roman(4).unwrap(), "IV");
        assert_eq!(to_roman(1994).unwrap(), "MCMXCIV");
        for n in 1..=3999 {
            assert_eq!(to_roman(n).unwrap(), oracle_roman(n));
        }
        assert!(matches!(to_roman(0), Err(CorpusError::OutOfRange(0))));
        assert!(matches!(to_roman(4000), Err(CorpusError::OutOfRange(4000))));
    }

    #[test]
    fn filenames() {
        assert_eq!(
            pair_filenames(1).unwrap(),
            ("I_data_point_001.txt".into(), "I_data_point_002.txt".into())
        );
        assert_eq!(
            pair_filenames(5).unwrap(),
            ("V_data_point_009.txt".into(), "V_data_point_010.txt".into())
        );
        assert!(pair_filenames(4).unwrap().0.starts_with("IV_"));
    }

    #[test]
    fn import_two_rows() {
        let f = tmpfile("label,text\n0,hello there\n1,\"a, quoted\nline\"\n");
        let recs = import_csv(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].text_id, "rec_00001");
        assert_eq!(recs[0].label, Label::Nanon);
        assert_eq!(recs[1].label, Label::Anon);
        assert_eq!(recs[1].text, "a, quoted\nline");
    }

    #[test]
    fn import_errors() {
        let f = tmpfile("label,text\n0,ok\n2,bad\n");
        assert!(matches!(
            import_csv(f.path()),
            Err(CorpusError::BadLabel { row: 2, .. })
        ));
        let f = tmpfile("lbl,text\n0,ok\n");
        assert!(matches!(import_csv(f.path()), Err(CorpusError::BadHeader { .. })));
        let f = tmpfile("text_id,label,text\nx,0,a\nx,1,b\n");
        assert!(matches!(import_csv(f.path()), Err(CorpusError::DuplicateId(id)) if id == "x"));
        assert!(matches!(
            import_csv(Path::new("/nonexistent/file.csv")),
            Err(CorpusError::MissingFile(_))
        ));
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            LabeledRecord {
                text_id: "a".into(),
                label: Label::Nanon,
                text: "plain, \"text\"\n".into(),
            },
            LabeledRecord {
                text_id: "b".into(),
                label: Label::Anon,
                text: "h\u{2060}i\u{200c}\u{2060}".into(),
            },
        ];
        let path = dir.path().join("r.csv");
        write_records(&recs, &path).unwrap();
        assert_eq!(import_csv(&path).unwrap(), recs);

        let files = export_pairs(&pair_up(&recs), &dir.path().join("out")).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), recs[0].text);
        assert_eq!(fs::read_to_string(&files[1]).unwrap(), recs[1].text);
    }

    #[test]
    fn parity_rule() {
        let recs: Vec<LabeledRecord> = (0..14)
            .map(|i| LabeledRecord {
                text_id: format!("r{i}"),
                label: if i % 2 == 0 { Label::Nanon } else { Label::Anon },
                text: format!("text {i}"),
            })
            .collect();
        let pairs = pair_up(&recs);
        assert_eq!(pairs.len(), 7);
        let dir = tempfile::tempdir().unwrap();
        for path in export_pairs(&pairs, dir.path()).unwrap() {
            let name = path.file_name().unwrap().to_str().unwrap();
            let suffix: usize = name
                .trim_end_matches(".txt")
                .rsplit('_')
                .next()
                .unwrap()
                .parse()
                .unwrap();
            let text = fs::read_to_string(&path).unwrap();
            let rec = recs.iter().find(|r| r.text == text).unwrap();
            assert_eq!(suffix % 2 == 1, rec.label == Label::Nanon, "{name}");
        }
    }

    #[test]
    fn pairs_csv() {
        let f = tmpfile("pair_id,nanon_text,anon_text\nI,src one,anon one\nII,src two,anon two\n");
        let pairs = import_pairs(f.path()).unwrap();
        assert_eq!(pairs[1].pair_index, 2);
        assert_eq!(pairs[1].anon.label, Label::Anon);
        let out = tempfile::NamedTempFile::new().unwrap();
        write_pairs(&pairs, out.path()).unwrap();
        assert_eq!(
            fs::read_to_string(out.path()).unwrap(),
            fs::read_to_string(f.path()).unwrap()
        );
    }

    #[test]
    fn feature_csv_round_trip() {
        let fv = FeatureVector {
            l_func_a: 0.5,
            l_func_t: 0.25,
            l_cont_a: 0.125,
            l_cont_t: 0.0625,
            ttr_lemmas: 0.75,
            word_ttr: 28.0 / 33.0,
            token_count: 33,
            type_count: 28,
            label: Some(Label::Anon),
            mode: TokenMode::Raw,
            empty: false,
        };
        let mut buf = Vec::new();
        write_feature_csv(
            &[FeatureRow {
                text_id: "t".into(),
                features: fv.clone(),
            }],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "text_id,label,mode,l_cont_a,l_func_a,l_cont_t,l_func_t,ttr_lemmas,word_ttr,token_count,type_count\n\
             t,1,raw,0.1250,0.5000,0.0625,0.2500,0.7500,0.8485,33,28\n"
        );
        let f = tmpfile(&text);
        let rows = read_feature_csv(f.path()).unwrap();
        assert_eq!(rows[0].features.word_ttr, 0.8485);
        assert_eq!(rows[0].features.label, Some(Label::Anon));
        let m = feature_matrix(&rows).unwrap();
        assert_eq!(m.rows()[0], vec![0.125, 0.5, 0.0625, 0.25, 0.75]);
    }

    #[test]
    fn label_serde() {
        assert_eq!(serde_json::to_string(&Label::Anon).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Label>("0").unwrap(), Label::Nanon);
        assert!(serde_json::from_str::<Label>("2").is_err());
    }
}
