// Copyright 2026 The qdfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Tomography counts files.
//!
//! One `setting_label,count` row per measurement setting, 16 or 36 rows.
//! Blank lines and lines starting with `#` are ignored, and a single
//! `setting_label,count` header may precede the data.

use std::collections::HashSet;

use qdfusion::metrics::{parse_setting, TomographyRecord};

use crate::CliError;

fn at(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

pub fn parse_counts(text: &str) -> Result<TomographyRecord, CliError> {
    let mut settings = Vec::new();
    let mut counts = Vec::new();
    let mut seen = HashSet::new();
    let mut header_allowed = true;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if header_allowed && fields == ["setting_label", "count"] {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        let [label, count] = fields[..] else {
            return Err(at(line, format!("expected `setting_label,count`, found {} field(s)", fields.len())));
        };
        let setting = parse_setting(label).ok_or_else(|| at(line, format!("unknown setting label `{label}`")))?;
        let count: i64 = count.parse().map_err(|_| at(line, format!("count `{count}` is not an integer")))?;
        if count < 0 {
            return Err(at(line, format!("negative count {count} for setting {label}")));
        }
        if !seen.insert(label.to_string()) {
            return Err(at(line, format!("duplicate setting {label}")));
        }
        settings.push(setting);
        counts.push(count);
    }
    if settings.len() != 16 && settings.len() != 36 {
        return Err(CliError::Input(format!("expected 16 or 36 settings, found {}", settings.len())));
    }
    TomographyRecord::new(settings, counts).map_err(|e| CliError::Input(e.to_string()))
}

pub fn format_counts(record: &TomographyRecord) -> String {
    let mut out = String::from("setting_label,count\n");
    for (label, n) in record.labels().iter().zip(&record.counts) {
        out += &format!("{label},{n}\n");
    }
    out
}
