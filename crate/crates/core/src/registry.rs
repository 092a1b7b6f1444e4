//! Student registry: students, study rights and credit registrations.
//!
//! A [`Registry`] is validated once at construction and is immutable
//! afterwards. Loading and writing use the three-file CSV layout
//! (`students.csv`, `study_rights.csv`, `credits.csv`).

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Months, NaiveDate};
use thiserror::Error;

pub const STUDENTS_FILE: &str = "students.csv";
pub const STUDY_RIGHTS_FILE: &str = "study_rights.csv";
pub const CREDITS_FILE: &str = "credits.csv";

const STUDENTS_HEADER: [&str; 2] = ["student_id", "gender"];
const STUDY_RIGHTS_HEADER: [&str; 6] = [
    "study_right_id",
    "student_id",
    "start_date",
    "right_type",
    "field",
    "graduation_date",
];
const CREDITS_HEADER: [&str; 3] = ["study_right_id", "registration_date", "credits"];

/// Length of a combined Bachelor's + Master's study right.
pub const VALIDITY_YEARS: u32 = 7;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Header {
        file: String,
        expected: String,
        found: String,
    },
    #[error("duplicate {kind} key `{key}`")]
    DuplicateKey { kind: &'static str, key: String },
    #[error("{kind} `{from}` references unknown {target} `{key}`")]
    DanglingKey {
        kind: &'static str,
        from: String,
        target: &'static str,
        key: String,
    },
    #[error("study right `{id}`: graduation date {graduation} precedes start date {start}")]
    GraduationBeforeStart {
        id: String,
        start: NaiveDate,
        graduation: NaiveDate,
    },
    #[error("study right `{id}`: credit registration on {date} precedes start date {start}")]
    CreditBeforeStart {
        id: String,
        start: NaiveDate,
        date: NaiveDate,
    },
    #[error("study right `{id}`: credits must be positive and finite, got {credits}")]
    InvalidCredits { id: String, credits: f64 },
    #[error("empty {0} key")]
    EmptyKey(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
    Unspecified,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Female => "F",
            Gender::Male => "M",
            Gender::Unspecified => "U",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unspecified => "unspecified",
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "F" => Ok(Gender::Female),
            "M" => Ok(Gender::Male),
            "U" => Ok(Gender::Unspecified),
            other => Err(format!("unknown gender code `{other}` (expected F, M or U)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RightType {
    CombinedBscMsc,
    Other,
}

impl RightType {
    pub fn code(self) -> &'static str {
        match self {
            RightType::CombinedBscMsc => "combined",
            RightType::Other => "other",
        }
    }
}

impl FromStr for RightType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "combined" => Ok(RightType::CombinedBscMsc),
            "other" => Ok(RightType::Other),
            other => Err(format!(
                "unknown right type `{other}` (expected combined or other)"
            )),
        }
    }
}

/// School of the study right. Business is the reference category in the models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Engineering,
    ArtsAndDesign,
    Business,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Engineering, Field::ArtsAndDesign, Field::Business];

    pub fn code(self) -> &'static str {
        match self {
            Field::Engineering => "engineering",
            Field::ArtsAndDesign => "arts_and_design",
            Field::Business => "business",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "engineering" => Ok(Field::Engineering),
            "arts_and_design" => Ok(Field::ArtsAndDesign),
            "business" => Ok(Field::Business),
            other => Err(format!(
                "unknown field `{other}` (expected engineering, arts_and_design or business)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Student {
    pub student_id: String,
    pub gender: Gender,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyRight {
    pub study_right_id: String,
    pub student_id: String,
    pub start_date: NaiveDate,
    pub right_type: RightType,
    pub field: Field,
    pub graduation_date: Option<NaiveDate>,
}

impl StudyRight {
    /// Last day (exclusive) on which the right is valid: start + 7 calendar years.
    pub fn validity_end(&self) -> NaiveDate {
        validity_end(self.start_date)
    }

    /// Active on `date` ⇔ start ≤ date < min(graduation, validity end).
    pub fn is_active_on(&self, date: NaiveDate) -> bool {
        let mut end = self.validity_end();
        if let Some(grad) = self.graduation_date {
            end = end.min(grad);
        }
        self.start_date <= date && date < end
    }
}

pub fn validity_end(start: NaiveDate) -> NaiveDate {
    start
        .checked_add_months(Months::new(12 * VALIDITY_YEARS))
        .expect("date out of range")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CreditEvent {
    pub study_right_id: String,
    pub registration_date: NaiveDate,
    pub credits: f64,
}

/// Validated, immutable registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    students: Vec<Student>,
    study_rights: Vec<StudyRight>,
    credit_events: Vec<CreditEvent>,
    student_index: HashMap<String, usize>,
    events_by_right: HashMap<String, Vec<usize>>,
}

impl Registry {
    /// Cross-validates the three collections and builds lookup indexes.
    pub fn new(
        students: Vec<Student>,
        study_rights: Vec<StudyRight>,
        credit_events: Vec<CreditEvent>,
    ) -> Result<Self> {
        let mut student_index = HashMap::with_capacity(students.len());
        for (i, s) in students.iter().enumerate() {
            if s.student_id.is_empty() {
                return Err(RegistryError::EmptyKey("student"));
            }
            if student_index.insert(s.student_id.clone(), i).is_some() {
                return Err(RegistryError::DuplicateKey {
                    kind: "student",
                    key: s.student_id.clone(),
                });
            }
        }

        let mut right_index: HashMap<&str, usize> = HashMap::with_capacity(study_rights.len());
        for (i, r) in study_rights.iter().enumerate() {
            if r.study_right_id.is_empty() {
                return Err(RegistryError::EmptyKey("study right"));
            }
            if right_index.insert(&r.study_right_id, i).is_some() {
                return Err(RegistryError::DuplicateKey {
                    kind: "study right",
                    key: r.study_right_id.clone(),
                });
            }
            if !student_index.contains_key(&r.student_id) {
                return Err(RegistryError::DanglingKey {
                    kind: "study right",
                    from: r.study_right_id.clone(),
                    target: "student",
                    key: r.student_id.clone(),
                });
            }
            if let Some(grad) = r.graduation_date {
                if grad < r.start_date {
                    return Err(RegistryError::GraduationBeforeStart {
                        id: r.study_right_id.clone(),
                        start: r.start_date,
                        graduation: grad,
                    });
                }
            }
        }

        let mut events_by_right: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in credit_events.iter().enumerate() {
            let Some(&ri) = right_index.get(e.study_right_id.as_str()) else {
                return Err(RegistryError::DanglingKey {
                    kind: "credit event",
                    from: format!("#{}", i + 1),
                    target: "study right",
                    key: e.study_right_id.clone(),
                });
            };
            if !(e.credits.is_finite() && e.credits > 0.0) {
                return Err(RegistryError::InvalidCredits {
                    id: e.study_right_id.clone(),
                    credits: e.credits,
                });
            }
            let start = study_rights[ri].start_date;
            if e.registration_date < start {
                return Err(RegistryError::CreditBeforeStart {
                    id: e.study_right_id.clone(),
                    start,
                    date: e.registration_date,
                });
            }
            events_by_right
                .entry(e.study_right_id.clone())
                .or_default()
                .push(i);
        }

        Ok(Registry {
            students,
            study_rights,
            credit_events,
            student_index,
            events_by_right,
        })
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn study_rights(&self) -> &[StudyRight] {
        &self.study_rights
    }

    pub fn credit_events(&self) -> &[CreditEvent] {
        &self.credit_events
    }

    pub fn student(&self, student_id: &str) -> Option<&Student> {
        self.student_index.get(student_id).map(|&i| &self.students[i])
    }

    /// Credit events of one study right, in registry order.
    pub fn events_for<'a>(&'a self, study_right_id: &str) -> impl Iterator<Item = &'a CreditEvent> {
        self.events_by_right
            .get(study_right_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.credit_events[i])
    }

    /// Writes the three canonical CSV files into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| RegistryError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let create = |name: &str| {
            let path = dir.join(name);
            File::create(&path).map_err(|source| RegistryError::Io { path, source })
        };
        self.write_students(create(STUDENTS_FILE)?)?;
        self.write_study_rights(create(STUDY_RIGHTS_FILE)?)?;
        self.write_credits(create(CREDITS_FILE)?)?;
        Ok(())
    }

    pub fn write_students<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(STUDENTS_HEADER)?;
        for s in &self.students {
            out.write_record([s.student_id.as_str(), s.gender.code()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_study_rights<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(STUDY_RIGHTS_HEADER)?;
        for r in &self.study_rights {
            let grad = r.graduation_date.map(format_date).unwrap_or_default();
            out.write_record([
                r.study_right_id.as_str(),
                r.student_id.as_str(),
                &format_date(r.start_date),
                r.right_type.code(),
                r.field.code(),
                &grad,
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_credits<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(CREDITS_HEADER)?;
        for e in &self.credit_events {
            out.write_record([
                e.study_right_id.as_str(),
                &format_date(e.registration_date),
                &e.credits.to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Loads and cross-validates a registry from the three CSV files.
pub fn load_registry(
    students_path: &Path,
    study_rights_path: &Path,
    credits_path: &Path,
) -> Result<Registry> {
    let open = |path: &Path| {
        File::open(path).map_err(|source| RegistryError::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    let students = read_students(open(students_path)?, &display_name(students_path))?;
    let rights = read_study_rights(open(study_rights_path)?, &display_name(study_rights_path))?;
    let credits = read_credits(open(credits_path)?, &display_name(credits_path))?;
    Registry::new(students, rights, credits)
}

/// Loads `students.csv`, `study_rights.csv` and `credits.csv` from one directory.
pub fn load_registry_dir(dir: &Path) -> Result<Registry> {
    load_registry(
        &dir.join(STUDENTS_FILE),
        &dir.join(STUDY_RIGHTS_FILE),
        &dir.join(CREDITS_FILE),
    )
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn read_students<R: Read>(r: R, file: &str) -> Result<Vec<Student>> {
    let mut out = Vec::new();
    for_each_record(r, file, &STUDENTS_HEADER, |rec, line| {
        let gender = rec[1].parse().map_err(|m| malformed(file, line, m))?;
        out.push(Student {
            student_id: rec[0].to_string(),
            gender,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_study_rights<R: Read>(r: R, file: &str) -> Result<Vec<StudyRight>> {
    let mut out = Vec::new();
    for_each_record(r, file, &STUDY_RIGHTS_HEADER, |rec, line| {
        let start_date = parse_date(&rec[2]).map_err(|m| malformed(file, line, m))?;
        let right_type = rec[3].parse().map_err(|m| malformed(file, line, m))?;
        let field = rec[4].parse().map_err(|m| malformed(file, line, m))?;
        let graduation_date = if rec[5].is_empty() {
            None
        } else {
            Some(parse_date(&rec[5]).map_err(|m| malformed(file, line, m))?)
        };
        out.push(StudyRight {
            study_right_id: rec[0].to_string(),
            student_id: rec[1].to_string(),
            start_date,
            right_type,
            field,
            graduation_date,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_credits<R: Read>(r: R, file: &str) -> Result<Vec<CreditEvent>> {
    let mut out = Vec::new();
    for_each_record(r, file, &CREDITS_HEADER, |rec, line| {
        let registration_date = parse_date(&rec[1]).map_err(|m| malformed(file, line, m))?;
        let credits = parse_decimal(&rec[2]).map_err(|m| malformed(file, line, m))?;
        if credits <= 0.0 {
            return Err(malformed(file, line, format!("credits must be positive, got {credits}")));
        }
        out.push(CreditEvent {
            study_right_id: rec[0].to_string(),
            registration_date,
            credits,
        });
        Ok(())
    })?;
    Ok(out)
}

fn for_each_record<R, F>(r: R, file: &str, header: &[&str], mut f: F) -> Result<()>
where
    R: Read,
    F: FnMut(&csv::StringRecord, u64) -> Result<()>,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut records = reader.records();
    let found = match records.next() {
        Some(rec) => rec?,
        None => csv::StringRecord::new(),
    };
    if found.iter().ne(header.iter().copied()) {
        return Err(RegistryError::Header {
            file: file.to_string(),
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            malformed(file, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(malformed(
                file,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        f(&rec, line)?;
    }
    Ok(())
}

fn malformed(file: &str, line: u64, message: impl Into<String>) -> RegistryError {
    RegistryError::Malformed {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Strict `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return Err(format!("invalid date `{s}` (expected YYYY-MM-DD)"));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("invalid date `{s}`: {e}"))
}

pub fn format_date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

fn parse_decimal(s: &str) -> std::result::Result<f64, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return Err(format!("invalid decimal `{s}`"));
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid decimal `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("invalid decimal `{s}`"));
    }
    Ok(v)
}

/// Cohort selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohortRules {
    /// Rights must start after this date.
    pub cutoff: NaiveDate,
    /// Admit rights that start exactly on `cutoff`.
    pub include_cutoff: bool,
}

impl Default for CohortRules {
    fn default() -> Self {
        CohortRules {
            cutoff: NaiveDate::from_ymd_opt(2005, 8, 1).unwrap(),
            include_cutoff: false,
        }
    }
}

impl CohortRules {
    pub fn admits(&self, right: &StudyRight, observation_date: NaiveDate) -> bool {
        let after_cutoff = if self.include_cutoff {
            right.start_date >= self.cutoff
        } else {
            right.start_date > self.cutoff
        };
        after_cutoff
            && right.right_type == RightType::CombinedBscMsc
            && right.is_active_on(observation_date)
    }
}

/// Study rights in the modelling cohort at `observation_date`, in registry order.
pub fn filter_cohort(registry: &Registry, observation_date: NaiveDate) -> Vec<&StudyRight> {
    filter_cohort_with(registry, observation_date, &CohortRules::default())
}

pub fn filter_cohort_with<'a>(
    registry: &'a Registry,
    observation_date: NaiveDate,
    rules: &CohortRules,
) -> Vec<&'a StudyRight> {
    registry
        .study_rights()
        .iter()
        .filter(|r| rules.admits(r, observation_date))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    const STUDENTS: &str = "student_id,gender\nS1,F\nS2,M\n";
    const RIGHTS: &str = "study_right_id,student_id,start_date,right_type,field,graduation_date\n\
R1,S1,2008-08-01,combined,engineering,\n\
R2,S2,2009-08-01,combined,business,2014-06-15\n";
    const CREDITS: &str = "study_right_id,registration_date,credits\n\
R1,2008-12-01,30\nR1,2009-05-01,25.5\nR2,2009-12-01,30\nR2,2010-05-01,5\nR2,2011-01-10,10\n";

    fn load(students: &str, rights: &str, credits: &str) -> Result<Registry> {
        Registry::new(
            read_students(students.as_bytes(), "students.csv")?,
            read_study_rights(rights.as_bytes(), "study_rights.csv")?,
            read_credits(credits.as_bytes(), "credits.csv")?,
        )
    }

    #[test]
    fn loads_valid_files() {
        let reg = load(STUDENTS, RIGHTS, CREDITS).unwrap();
        assert_eq!(reg.students().len(), 2);
        assert_eq!(reg.study_rights().len(), 2);
        assert_eq!(reg.credit_events().len(), 5);
        assert_eq!(reg.events_for("R1").count(), 2);
        assert_eq!(reg.study_rights()[1].graduation_date, Some(d("2014-06-15")));
    }

    #[test]
    fn dangling_credit_names_the_id() {
        let credits = "study_right_id,registration_date,credits\nR9,2010-01-01,5\n";
        let err = load(STUDENTS, RIGHTS, credits).unwrap_err();
        assert!(matches!(err, RegistryError::DanglingKey { .. }));
        assert!(err.to_string().contains("R9"), "{err}");
    }

    #[test]
    fn graduation_before_start_rejected() {
        let rights = "study_right_id,student_id,start_date,right_type,field,graduation_date\n\
R1,S1,2008-08-01,combined,engineering,2008-07-01\n";
        let err = load(STUDENTS, rights, "study_right_id,registration_date,credits\n").unwrap_err();
        assert!(matches!(err, RegistryError::GraduationBeforeStart { .. }));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = load("student_id,gender\nS1,F\nS1,M\n", "study_right_id,student_id,start_date,right_type,field,graduation_date\n", "study_right_id,registration_date,credits\n").unwrap_err();
        assert!(matches!(err, RegistryError::DuplicateKey { kind: "student", .. }));
    }

    #[test]
    fn malformed_row_reports_line() {
        let rights = "study_right_id,student_id,start_date,right_type,field,graduation_date\n\
R1,S1,2008-08-01,combined,engineering,\n\
R2,S2,2009/08/01,combined,business,\n";
        let err = read_study_rights(rights.as_bytes(), "study_rights.csv").unwrap_err();
        match err {
            RegistryError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let err = read_students("id,gender\nS1,F\n".as_bytes(), "students.csv").unwrap_err();
        assert!(matches!(err, RegistryError::Header { .. }));
    }

    #[test]
    fn credits_before_start_and_nonpositive_rejected() {
        let early = "study_right_id,registration_date,credits\nR1,2008-07-01,5\n";
        assert!(matches!(
            load(STUDENTS, RIGHTS, early).unwrap_err(),
            RegistryError::CreditBeforeStart { .. }
        ));
        let zero = "study_right_id,registration_date,credits\nR1,2008-09-01,0\n";
        assert!(matches!(
            load(STUDENTS, RIGHTS, zero).unwrap_err(),
            RegistryError::Malformed { line: 2, .. }
        ));
    }

    #[test]
    fn canonical_writer_round_trips() {
        let reg = load(STUDENTS, RIGHTS, CREDITS).unwrap();
        let mut s = Vec::new();
        let mut r = Vec::new();
        let mut c = Vec::new();
        reg.write_students(&mut s).unwrap();
        reg.write_study_rights(&mut r).unwrap();
        reg.write_credits(&mut c).unwrap();
        assert_eq!(String::from_utf8(s).unwrap(), STUDENTS);
        assert_eq!(String::from_utf8(r).unwrap(), RIGHTS);
        assert_eq!(String::from_utf8(c).unwrap(), CREDITS);
    }

    fn right(id: &str, start: &str, kind: RightType, grad: Option<&str>) -> StudyRight {
        StudyRight {
            study_right_id: id.into(),
            student_id: "S1".into(),
            start_date: d(start),
            right_type: kind,
            field: Field::Engineering,
            graduation_date: grad.map(d),
        }
    }

    fn one_student() -> Vec<Student> {
        vec![Student {
            student_id: "S1".into(),
            gender: Gender::Female,
        }]
    }

    #[test]
    fn cohort_examples() {
        let reg = Registry::new(
            one_student(),
            vec![
                right("early", "2005-07-15", RightType::CombinedBscMsc, None),
                right("ok", "2008-08-01", RightType::CombinedBscMsc, None),
                right("done", "2008-08-01", RightType::CombinedBscMsc, Some("2011-06-01")),
            ],
            vec![],
        )
        .unwrap();
        let ids: Vec<_> = filter_cohort(&reg, d("2011-08-01"))
            .iter()
            .map(|r| r.study_right_id.as_str())
            .collect();
        assert_eq!(ids, ["ok"]);
    }

    #[test]
    fn cutoff_boundary_is_configurable() {
        let reg = Registry::new(
            one_student(),
            vec![right("edge", "2005-08-01", RightType::CombinedBscMsc, None)],
            vec![],
        )
        .unwrap();
        let obs = d("2006-01-01");
        assert!(filter_cohort(&reg, obs).is_empty());
        let rules = CohortRules {
            include_cutoff: true,
            ..CohortRules::default()
        };
        assert_eq!(filter_cohort_with(&reg, obs, &rules).len(), 1);
    }

    #[test]
    fn validity_end_uses_calendar_years() {
        assert_eq!(validity_end(d("2008-08-01")), d("2015-08-01"));
        assert_eq!(validity_end(d("2008-02-29")), d("2015-02-28"));
        let r = right("x", "2008-08-01", RightType::CombinedBscMsc, None);
        assert!(r.is_active_on(d("2015-07-31")));
        assert!(!r.is_active_on(d("2015-08-01")));
        assert!(!r.is_active_on(d("2008-07-31")));
    }
}
