#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use gradpath::glm::DesignMatrix;
use gradpath::pipeline::{load_artifact, ModelArtifact, ModelId};
use serde_json::Value;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn fixture_path(id: &ModelId) -> PathBuf {
    fixtures_dir().join(format!("{}.json", id.as_str().to_ascii_lowercase()))
}

pub fn fixture(id: ModelId) -> ModelArtifact {
    load_artifact(&fixture_path(&id)).expect("shipped fixture loads")
}

pub fn d(s: &str) -> NaiveDate {
    gradpath::registry::parse_date(s).unwrap()
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_gradpath"))
}

/// Seeded dataset and the reference fit computed offline.
pub struct Golden {
    pub design: DesignMatrix,
    pub expected: Value,
}

pub fn load(name: &str) -> Golden {
    let dir = data_dir();
    let mut rdr = csv::Reader::from_path(dir.join(format!("{name}.csv"))).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let k = header.len() - 1;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for j in 0..k {
            cols[j].push(rec[j].parse().unwrap());
        }
        y.push(rec[k].parse().unwrap());
    }
    let columns = header[..k].iter().cloned().zip(cols).collect();
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap();
    Golden {
        design: DesignMatrix::with_constant(columns, y).unwrap(),
        expected,
    }
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}


pub mod sql {
    use gradpath::codegen::{emit_sql_view, emit_two_stage_sql, SqlViewSpec};
    use gradpath::featurize::FeatureRow;
    use gradpath::pipeline::{self, ModelArtifact};
    use gradpath::synthgen::SplitMix64;
    use rusqlite::Connection;

    /// Random but plausible feature rows.
    pub fn random_rows(n: usize, seed: u64) -> Vec<FeatureRow> {
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|i| {
                let male = u8::from(rng.bernoulli(0.5));
                let field = rng.categorical(&[0.5, 0.2, 0.3]);
                FeatureRow {
                    study_right_id: format!("R{i:04}"),
                    gender_female: 1 - male,
                    gender_male: male,
                    field_engineering: u8::from(field == 0),
                    field_arts_and_design: u8::from(field == 1),
                    field_business: u8::from(field == 2),
                    sum_of_cr: (rng.next_f64() * 600.0).round() / 2.0,
                    no_credits_in_18m: u8::from(rng.bernoulli(0.2)),
                    distance_to_validity_end: rng.next_f64() * 7.0,
                    graduated: None,
                    graduates_in_4y: None,
                    semesters_to_degree: None,
                }
            })
            .collect()
    }

    pub fn database(rows: &[FeatureRow]) -> Connection {
        let conn = Connection::open_in_memory().unwrap();
        conn.execute_batch(
            "CREATE TABLE features (
                study_right_id TEXT PRIMARY KEY,
                gender_female REAL, gender_male REAL,
                field_engineering REAL, field_arts_and_design REAL, field_business REAL,
                sum_of_cr REAL, no_credits_in_18m REAL, distance_to_validity_end REAL
            );",
        )
        .unwrap();
        let mut stmt = conn
            .prepare("INSERT INTO features VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)")
            .unwrap();
        for r in rows {
            stmt.execute(rusqlite::params![
                r.study_right_id,
                f64::from(r.gender_female),
                f64::from(r.gender_male),
                f64::from(r.field_engineering),
                f64::from(r.field_arts_and_design),
                f64::from(r.field_business),
                r.sum_of_cr,
                f64::from(r.no_credits_in_18m),
                r.distance_to_validity_end,
            ])
            .unwrap();
        }
        drop(stmt);
        conn
    }

    /// Largest |SQL score − in-process score| over `rows` for a single-model view.
    pub fn max_view_error(artifact: &ModelArtifact, rows: &[FeatureRow]) -> f64 {
        let conn = database(rows);
        let spec = SqlViewSpec::new("scored", "features", "study_right_id");
        conn.execute_batch(&emit_sql_view(artifact, &spec).unwrap()).unwrap();
        let column = artifact.model_id.output_column();
        let mut stmt = conn
            .prepare(&format!("SELECT study_right_id, {column} FROM scored ORDER BY study_right_id"))
            .unwrap();
        let got: Vec<(String, f64)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?)))
            .unwrap()
            .map(Result::unwrap)
            .collect();
        assert_eq!(got.len(), rows.len());
        got.iter()
            .zip(rows)
            .map(|((id, v), row)| {
                assert_eq!(id, &row.study_right_id);
                (v - pipeline::score(artifact, row).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Two-stage view rows: `(id, p_graduate_4y, time_to_degree, category)`.
    pub fn two_stage_rows(
        pm2: &ModelArtifact,
        pm3: &ModelArtifact,
        rows: &[FeatureRow],
        threshold: f64,
    ) -> Vec<(String, f64, Option<f64>, String)> {
        let conn = database(rows);
        let mut spec = SqlViewSpec::new("predictions", "features", "study_right_id");
        spec.threshold = threshold;
        conn.execute_batch(&emit_two_stage_sql(pm2, pm3, &spec).unwrap()).unwrap();
        let mut stmt = conn
            .prepare(
                "SELECT study_right_id, p_graduate_4y, time_to_degree, category \
                 FROM predictions ORDER BY study_right_id",
            )
            .unwrap();
        let out = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)))
            .unwrap()
            .map(Result::unwrap)
            .collect();
        out
    }
}
