//! Covariates and labels for each cohort study right at an observation date.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use chrono::{Datelike, Months, NaiveDate};
use thiserror::Error;

use crate::privacy::ColumnApproval;
use crate::registry::{self, CreditEvent, Field, Gender, Registry, StudyRight};

/// Feature table CSV header, in order.
pub const FEATURE_COLUMNS: [&str; 12] = [
    "study_right_id",
    "gender_female",
    "gender_male",
    "field_engineering",
    "field_arts_and_design",
    "field_business",
    "sum_of_cr",
    "no_credits_in_18m",
    "distance_to_validity_end",
    "graduated",
    "graduates_in_4y",
    "semesters_to_degree",
];

/// Every covariate column a model term may name.
pub const COVARIATE_COLUMNS: [&str; 8] = [
    "gender_female",
    "gender_male",
    "field_engineering",
    "field_arts_and_design",
    "field_business",
    "sum_of_cr",
    "no_credits_in_18m",
    "distance_to_validity_end",
];

/// Covariates entering model fits; female and business are the reference categories.
pub const MODEL_COVARIATES: [&str; 6] = [
    "gender_male",
    "field_arts_and_design",
    "field_engineering",
    "no_credits_in_18m",
    "sum_of_cr",
    "distance_to_validity_end",
];

const NO_CREDIT_WINDOW_MONTHS: u32 = 18;
const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("label horizon {horizon} precedes observation date {observation}")]
    HorizonBeforeObservation {
        observation: NaiveDate,
        horizon: NaiveDate,
    },
    #[error("start date {start} is after observation date {observation}")]
    StartAfterObservation {
        start: NaiveDate,
        observation: NaiveDate,
    },
    #[error("study right expired {days} day(s) before observation date")]
    ValidityExpired { days: i64 },
    #[error("graduation date {graduation} precedes observation date {observation}")]
    GraduationBeforeObservation {
        observation: NaiveDate,
        graduation: NaiveDate,
    },
    #[error("column `{0}` has not been approved by the privacy gate")]
    Unapproved(String),
    #[error("study right `{0}` has no student record")]
    MissingStudent(String),
    #[error("features line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("features: expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("features csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for FeatureError {
    fn from(e: csv::Error) -> Self {
        FeatureError::Csv(e.to_string())
    }
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

/// Named numeric covariates, as consumed by scoring.
pub trait Covariates {
    fn covariate(&self, name: &str) -> Option<f64>;
}

impl Covariates for BTreeMap<String, f64> {
    fn covariate(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Covariates for HashMap<String, f64> {
    fn covariate(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub study_right_id: String,
    pub gender_female: u8,
    pub gender_male: u8,
    pub field_engineering: u8,
    pub field_arts_and_design: u8,
    pub field_business: u8,
    pub sum_of_cr: f64,
    pub no_credits_in_18m: u8,
    pub distance_to_validity_end: f64,
    pub graduated: Option<u8>,
    pub graduates_in_4y: Option<u8>,
    pub semesters_to_degree: Option<u32>,
}

impl FeatureRow {
    pub fn field(&self) -> Field {
        if self.field_engineering == 1 {
            Field::Engineering
        } else if self.field_arts_and_design == 1 {
            Field::ArtsAndDesign
        } else {
            Field::Business
        }
    }

    pub fn gender(&self) -> Gender {
        match (self.gender_female, self.gender_male) {
            (1, _) => Gender::Female,
            (_, 1) => Gender::Male,
            _ => Gender::Unspecified,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let dummies = [
            ("gender_female", self.gender_female),
            ("gender_male", self.gender_male),
            ("field_engineering", self.field_engineering),
            ("field_arts_and_design", self.field_arts_and_design),
            ("field_business", self.field_business),
            ("no_credits_in_18m", self.no_credits_in_18m),
        ];
        if let Some((name, v)) = dummies.iter().find(|(_, v)| *v > 1) {
            return Err(format!("{name} must be 0 or 1, got {v}"));
        }
        if self.gender_female + self.gender_male > 1 {
            return Err("gender_female and gender_male are both 1".into());
        }
        if self.field_engineering + self.field_arts_and_design + self.field_business != 1 {
            return Err("exactly one field_* column must be 1".into());
        }
        if !(self.sum_of_cr.is_finite() && self.sum_of_cr >= 0.0) {
            return Err(format!("sum_of_cr must be a nonnegative number, got {}", self.sum_of_cr));
        }
        if !self.distance_to_validity_end.is_finite() {
            return Err("distance_to_validity_end must be finite".into());
        }
        for (name, v) in [("graduated", self.graduated), ("graduates_in_4y", self.graduates_in_4y)] {
            if matches!(v, Some(x) if x > 1) {
                return Err(format!("{name} must be 0 or 1"));
            }
        }
        Ok(())
    }
}

impl Covariates for FeatureRow {
    fn covariate(&self, name: &str) -> Option<f64> {
        let v = match name {
            "gender_female" => self.gender_female.into(),
            "gender_male" => self.gender_male.into(),
            "field_engineering" => self.field_engineering.into(),
            "field_arts_and_design" => self.field_arts_and_design.into(),
            "field_business" => self.field_business.into(),
            "sum_of_cr" => self.sum_of_cr,
            "no_credits_in_18m" => self.no_credits_in_18m.into(),
            "distance_to_validity_end" => self.distance_to_validity_end,
            _ => return None,
        };
        Some(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub observation_date: NaiveDate,
    pub label_horizon: Option<NaiveDate>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn columns(&self) -> &'static [&'static str] {
        &FEATURE_COLUMNS
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_graduated_label(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.graduated.is_some())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(FEATURE_COLUMNS)?;
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.study_right_id.clone(),
                r.gender_female.to_string(),
                r.gender_male.to_string(),
                r.field_engineering.to_string(),
                r.field_arts_and_design.to_string(),
                r.field_business.to_string(),
                r.sum_of_cr.to_string(),
                r.no_credits_in_18m.to_string(),
                r.distance_to_validity_end.to_string(),
                opt(r.graduated.map(u32::from)),
                opt(r.graduates_in_4y.map(u32::from)),
                opt(r.semesters_to_degree),
            ])?;
        }
        out.flush().map_err(|e| FeatureError::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads a feature CSV. The observation date and label horizon are not part
    /// of the file and must be supplied by the caller.
    pub fn read_csv<R: Read>(
        r: R,
        observation_date: NaiveDate,
        label_horizon: Option<NaiveDate>,
        approval: &ColumnApproval,
    ) -> Result<FeatureTable> {
        require_approval(approval)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = reader.headers()?.clone();
        if header.iter().ne(FEATURE_COLUMNS) {
            return Err(FeatureError::Header {
                expected: FEATURE_COLUMNS.join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let bad = |message: String| FeatureError::Malformed { line, message };
            let dummy = |i: usize| -> Result<u8> {
                rec[i]
                    .parse::<u8>()
                    .map_err(|_| bad(format!("{}: expected 0 or 1, got `{}`", FEATURE_COLUMNS[i], &rec[i])))
            };
            let number = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{}: invalid number `{}`", FEATURE_COLUMNS[i], &rec[i])))
            };
            let opt_dummy = |i: usize| -> Result<Option<u8>> {
                if rec[i].is_empty() { Ok(None) } else { dummy(i).map(Some) }
            };
            let semesters = if rec[11].is_empty() {
                None
            } else {
                Some(rec[11].parse::<u32>().map_err(|_| {
                    bad(format!("semesters_to_degree: invalid count `{}`", &rec[11]))
                })?)
            };
            let row = FeatureRow {
                study_right_id: rec[0].to_string(),
                gender_female: dummy(1)?,
                gender_male: dummy(2)?,
                field_engineering: dummy(3)?,
                field_arts_and_design: dummy(4)?,
                field_business: dummy(5)?,
                sum_of_cr: number(6)?,
                no_credits_in_18m: dummy(7)?,
                distance_to_validity_end: number(8)?,
                graduated: opt_dummy(9)?,
                graduates_in_4y: opt_dummy(10)?,
                semesters_to_degree: semesters,
            };
            row.check().map_err(bad)?;
            rows.push(row);
        }
        Ok(FeatureTable {
            observation_date,
            label_horizon,
            rows,
        })
    }
}

fn require_approval(approval: &ColumnApproval) -> Result<()> {
    match approval.first_missing(FEATURE_COLUMNS) {
        Some(c) => Err(FeatureError::Unapproved(c.to_string())),
        None => Ok(()),
    }
}

/// Total credits registered on or before `observation_date`.
///
/// Summed in (date, amount) order so the result does not depend on the order
/// of the input events.
pub fn sum_credits<'a, I>(events: I, observation_date: NaiveDate) -> f64
where
    I: IntoIterator<Item = &'a CreditEvent>,
{
    let mut counted: Vec<(NaiveDate, f64)> = events
        .into_iter()
        .filter(|e| e.registration_date <= observation_date)
        .map(|e| (e.registration_date, e.credits))
        .collect();
    counted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    counted.into_iter().map(|(_, c)| c).sum()
}

/// Start of the no-credit window; the window itself is `(cutoff, observation]`.
pub fn no_credits_cutoff(observation_date: NaiveDate) -> NaiveDate {
    observation_date
        .checked_sub_months(Months::new(NO_CREDIT_WINDOW_MONTHS))
        .expect("date out of range")
}

/// 1 iff no event falls in `(observation − 18 months, observation]`.
pub fn no_credits_window<'a, I>(events: I, observation_date: NaiveDate) -> u8
where
    I: IntoIterator<Item = &'a CreditEvent>,
{
    let cutoff = no_credits_cutoff(observation_date);
    let any = events
        .into_iter()
        .any(|e| e.registration_date > cutoff && e.registration_date <= observation_date);
    u8::from(!any)
}

/// Years (day count / 365.25) from `observation_date` to the end of validity.
pub fn distance_to_validity_end(start_date: NaiveDate, observation_date: NaiveDate) -> Result<f64> {
    if start_date > observation_date {
        return Err(FeatureError::StartAfterObservation {
            start: start_date,
            observation: observation_date,
        });
    }
    let days = (registry::validity_end(start_date) - observation_date).num_days();
    if days < 0 {
        return Err(FeatureError::ValidityExpired { days: -days });
    }
    Ok(days as f64 / DAYS_PER_YEAR)
}

/// Semester index: two per year, autumn starting 1 August, spring 1 January.
pub fn semester_ordinal(date: NaiveDate) -> i64 {
    2 * i64::from(date.year()) + i64::from(date.month() >= 8)
}

/// First day of the semester with the given ordinal.
pub fn semester_start(ordinal: i64) -> NaiveDate {
    let year = ordinal.div_euclid(2) as i32;
    let month = if ordinal.rem_euclid(2) == 1 { 8 } else { 1 };
    NaiveDate::from_ymd_opt(year, month, 1).expect("date out of range")
}

pub fn semesters_between(observation_date: NaiveDate, graduation_date: NaiveDate) -> Result<u32> {
    if graduation_date < observation_date {
        return Err(FeatureError::GraduationBeforeObservation {
            observation: observation_date,
            graduation: graduation_date,
        });
    }
    Ok((semester_ordinal(graduation_date) - semester_ordinal(observation_date)) as u32)
}

fn four_years_after(date: NaiveDate) -> NaiveDate {
    date.checked_add_months(Months::new(48))
        .expect("date out of range")
}

/// Builds the feature row for one study right. Labels are derived from the
/// right's graduation date; `graduated` only when a horizon is given.
pub fn feature_row<'a, I>(
    right: &StudyRight,
    gender: Gender,
    events: I,
    observation_date: NaiveDate,
    label_horizon: Option<NaiveDate>,
) -> Result<FeatureRow>
where
    I: IntoIterator<Item = &'a CreditEvent> + Clone,
{
    let field = right.field;
    let grad = right.graduation_date;
    let semesters_to_degree = match grad {
        Some(g) if g > observation_date => Some(semesters_between(observation_date, g)?),
        _ => None,
    };
    Ok(FeatureRow {
        study_right_id: right.study_right_id.clone(),
        gender_female: u8::from(gender == Gender::Female),
        gender_male: u8::from(gender == Gender::Male),
        field_engineering: u8::from(field == Field::Engineering),
        field_arts_and_design: u8::from(field == Field::ArtsAndDesign),
        field_business: u8::from(field == Field::Business),
        sum_of_cr: sum_credits(events.clone(), observation_date),
        no_credits_in_18m: no_credits_window(events, observation_date),
        distance_to_validity_end: distance_to_validity_end(right.start_date, observation_date)?,
        graduated: label_horizon.map(|h| u8::from(matches!(grad, Some(g) if g <= h))),
        graduates_in_4y: Some(u8::from(
            matches!(grad, Some(g) if g <= four_years_after(observation_date)),
        )),
        semesters_to_degree,
    })
}

/// One row per cohort study right at `observation_date`, in registry order.
pub fn extract_features(
    registry: &Registry,
    observation_date: NaiveDate,
    label_horizon: Option<NaiveDate>,
    approval: &ColumnApproval,
) -> Result<FeatureTable> {
    require_approval(approval)?;
    if let Some(h) = label_horizon {
        if h < observation_date {
            return Err(FeatureError::HorizonBeforeObservation {
                observation: observation_date,
                horizon: h,
            });
        }
    }
    let rows = registry::filter_cohort(registry, observation_date)
        .into_iter()
        .map(|right| {
            let student = registry
                .student(&right.student_id)
                .ok_or_else(|| FeatureError::MissingStudent(right.study_right_id.clone()))?;
            let events: Vec<&CreditEvent> = registry.events_for(&right.study_right_id).collect();
            feature_row(
                right,
                student.gender,
                events.iter().copied(),
                observation_date,
                label_horizon,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        observation_date,
        label_horizon,
        rows,
    })
}
