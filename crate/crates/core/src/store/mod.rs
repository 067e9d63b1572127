//! Relational persistence of the precomputed planning data in an embedded
//! single-file database.

mod schema;

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use rusqlite::types::ValueRef;
use rusqlite::{params, Connection, OptionalExtension, Row, Transaction};
use thiserror::Error;

pub use schema::{DDL, SCHEMA_VERSION, TABLES};

use crate::graspplan::GraspConfig;
use crate::kinematics::{IkFeasibility, RetractionSpec};
use crate::placement::{GripContacts, Placement, PlacementGrip, Tabletop};
use crate::pose::{decode_numbers, decode_vec3, encode_numbers, encode_vec3, fmt_f64};
use crate::Pose;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("database: {0}")]
    Sql(#[from] rusqlite::Error),
    #[error("store schema is incompatible and needs migration: {0}")]
    MigrationRequired(String),
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("unknown robot '{0}'")]
    UnknownRobot(String),
    #[error("referential integrity: {0}")]
    Integrity(String),
    #[error("malformed stored value in {table}.{column}: {message}")]
    Decode { table: &'static str, column: &'static str, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Clone, Debug, PartialEq)]
pub struct FreeAirGripRow {
    pub id: i64,
    pub idobject: i64,
    pub contacts: GripContacts,
    pub rotmat: Pose,
    pub jawwidth: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreePlacementRow {
    pub id: i64,
    pub idobject: i64,
    pub rotmat: Pose,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeTabletopGripRow {
    pub id: i64,
    pub idfreeairgrip: i64,
    pub idfreetabletopplacement: i64,
    pub contacts: GripContacts,
    pub rotmat: Pose,
    pub jawwidth: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TabletopPlacementRow {
    pub id: i64,
    pub idfreetabletopplacement: i64,
    pub idangle: i64,
    pub position: [f64; 2],
    pub rotmat: Pose,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TabletopGripRow {
    pub id: i64,
    pub idtabletopplacements: i64,
    pub idfreeairgrip: i64,
    pub rotmat: Pose,
    pub jawwidth: f64,
    pub contacts: GripContacts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IkRow {
    pub idrobot: i64,
    pub idtabletopgrips: i64,
    pub feasibility: bool,
    pub feasibility_handx: bool,
    pub feasibility_handxworldz: bool,
}

/// Feasibility rows of one robot, keyed by in-memory tabletop grip id.
#[derive(Clone, Debug)]
pub struct RobotIk<'a> {
    pub name: &'a str,
    pub rows: &'a [IkFeasibility],
}

/// Everything one precompute run produces for one object.
#[derive(Clone, Debug)]
pub struct PipelineData<'a> {
    pub object_name: &'a str,
    pub grasps: &'a [GraspConfig],
    pub placements: &'a [Placement],
    pub placement_grips: &'a [PlacementGrip],
    /// Yaw values indexed by `TabletopPlacement::angle_id`.
    pub angles: &'a [f64],
    pub tabletop: &'a Tabletop,
    pub retraction: RetractionSpec,
    pub ik: Vec<RobotIk<'a>>,
}

/// Row ids assigned to in-memory objects, indexed by in-memory id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    pub object: i64,
    pub ikret: i64,
    pub grasps: HashMap<usize, i64>,
    pub placements: HashMap<usize, i64>,
    pub placement_grips: HashMap<usize, i64>,
    pub angles: Vec<i64>,
    pub tabletop_placements: HashMap<usize, i64>,
    pub tabletop_grips: HashMap<usize, i64>,
    pub robots: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub foreign_key_violations: Vec<String>,
    pub cardinality_violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.foreign_key_violations.is_empty() && self.cardinality_violations.is_empty()
    }
}

pub struct Store {
    conn: Connection,
}

fn lookup(map: &HashMap<usize, i64>, id: usize, what: &str) -> Result<i64> {
    map.get(&id)
        .copied()
        .ok_or_else(|| StoreError::Integrity(format!("{what} {id} does not exist")))
}

fn text_pose(row: &Row, idx: usize, table: &'static str, column: &'static str) -> Result<Pose> {
    let s: String = row.get(idx)?;
    Pose::decode(&s).map_err(|e| StoreError::Decode { table, column, message: e.to_string() })
}

fn text_point(row: &Row, idx: usize, table: &'static str, column: &'static str) -> Result<Point3<f64>> {
    Ok(Point3::from(text_vec(row, idx, table, column)?))
}

fn text_vec(row: &Row, idx: usize, table: &'static str, column: &'static str) -> Result<Vector3<f64>> {
    let s: String = row.get(idx)?;
    decode_vec3(&s).map_err(|e| StoreError::Decode { table, column, message: e.to_string() })
}

fn contacts_at(row: &Row, first: usize, table: &'static str) -> Result<GripContacts> {
    Ok(GripContacts {
        p0: text_point(row, first, table, "contactpoint0")?,
        p1: text_point(row, first + 1, table, "contactpoint1")?,
        n0: text_vec(row, first + 2, table, "contactnormal0")?,
        n1: text_vec(row, first + 3, table, "contactnormal1")?,
    })
}

fn encode_contacts(c: &GripContacts) -> [String; 4] {
    [
        encode_vec3(&c.p0.coords),
        encode_vec3(&c.p1.coords),
        encode_vec3(&c.n0),
        encode_vec3(&c.n1),
    ]
}

fn csv_field(v: ValueRef) -> String {
    match v {
        ValueRef::Null => String::new(),
        ValueRef::Integer(i) => i.to_string(),
        ValueRef::Real(f) => fmt_f64(f),
        ValueRef::Text(t) | ValueRef::Blob(t) => {
            let s = String::from_utf8_lossy(t);
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.into_owned()
            }
        }
    }
}

impl Store {
    /// Opens or creates a store; an existing file must carry exactly the
    /// expected schema.
    pub fn open(path: &Path) -> Result<Self> {
        Self::init(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    /// Opens an existing store without creating one.
    pub fn open_existing(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(StoreError::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} does not exist", path.display()),
            )));
        }
        Self::open(path)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", true)?;
        let existing: Vec<String> = conn
            .prepare("SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name")?
            .query_map([], |r| r.get(0))?
            .collect::<rusqlite::Result<_>>()?;
        if existing.is_empty() {
            conn.execute_batch(&format!(
                "BEGIN; {DDL} PRAGMA user_version = {SCHEMA_VERSION}; COMMIT;"
            ))?;
        } else {
            Self::check_schema(&conn, &existing)?;
        }
        Ok(Self { conn })
    }

    fn check_schema(conn: &Connection, existing: &[String]) -> Result<()> {
        let version: i64 = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
        if version != SCHEMA_VERSION {
            return Err(StoreError::MigrationRequired(format!(
                "schema version {version}, expected {SCHEMA_VERSION}"
            )));
        }
        let mut expected: Vec<&str> = TABLES.iter().map(|t| t.0).collect();
        expected.sort_unstable();
        if existing != expected.as_slice() {
            return Err(StoreError::MigrationRequired(format!(
                "tables {existing:?}, expected {expected:?}"
            )));
        }
        for (table, pk, cols) in TABLES {
            let info: Vec<(String, i64)> = conn
                .prepare(&format!("PRAGMA table_info({table})"))?
                .query_map([], |r| Ok((r.get(1)?, r.get(5)?)))?
                .collect::<rusqlite::Result<_>>()?;
            let names: Vec<&str> = info.iter().map(|c| c.0.as_str()).collect();
            if names != *cols {
                return Err(StoreError::MigrationRequired(format!(
                    "table {table} has columns {names:?}, expected {cols:?}"
                )));
            }
            let mut keys: Vec<(i64, &str)> = info
                .iter()
                .filter(|c| c.1 > 0)
                .map(|c| (c.1, c.0.as_str()))
                .collect();
            keys.sort_unstable();
            let keys: Vec<&str> = keys.into_iter().map(|k| k.1).collect();
            if keys != *pk {
                return Err(StoreError::MigrationRequired(format!(
                    "table {table} has primary key {keys:?}, expected {pk:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn connection(&self) -> &Connection {
        &self.conn
    }

    pub fn object_id(&self, name: &str) -> Result<i64> {
        self.conn
            .query_row("SELECT idobject FROM object WHERE name = ?1", [name], |r| r.get(0))
            .optional()?
            .ok_or_else(|| StoreError::UnknownObject(name.into()))
    }

    pub fn robot_id(&self, name: &str) -> Result<i64> {
        self.conn
            .query_row("SELECT idrobot FROM robot WHERE name = ?1", [name], |r| r.get(0))
            .optional()?
            .ok_or_else(|| StoreError::UnknownRobot(name.into()))
    }

    pub fn objects(&self) -> Result<Vec<(i64, String)>> {
        self.pairs_query("SELECT idobject, name FROM object ORDER BY idobject", [])
    }

    pub fn robots(&self) -> Result<Vec<(i64, String)>> {
        self.pairs_query("SELECT idrobot, name FROM robot ORDER BY idrobot", [])
    }

    fn pairs_query<T: rusqlite::types::FromSql>(
        &self,
        sql: &str,
        p: impl rusqlite::Params,
    ) -> Result<Vec<(i64, T)>> {
        Ok(self
            .conn
            .prepare(sql)?
            .query_map(p, |r| Ok((r.get(0)?, r.get(1)?)))?
            .collect::<rusqlite::Result<_>>()?)
    }

    fn ensure_object(&self, id: i64) -> Result<()> {
        let n: i64 = self
            .conn
            .query_row("SELECT COUNT(*) FROM object WHERE idobject = ?1", [id], |r| r.get(0))?;
        if n == 0 {
            return Err(StoreError::UnknownObject(format!("#{id}")));
        }
        Ok(())
    }

    /// Writes one object's pipeline in a single transaction, replacing any
    /// rows previously saved under the same object name. Nothing is written
    /// when an error is returned.
    pub fn save_pipeline(&mut self, data: &PipelineData) -> Result<IdMap> {
        let tx = self.conn.transaction()?;
        let map = Self::save_in(&tx, data)?;
        tx.commit()?;
        Ok(map)
    }

    fn save_in(tx: &Transaction, d: &PipelineData) -> Result<IdMap> {
        let mut map = IdMap::default();
        let existing: Option<i64> = tx
            .query_row("SELECT idobject FROM object WHERE name = ?1", [d.object_name], |r| r.get(0))
            .optional()?;
        map.object = match existing {
            Some(id) => {
                Self::delete_object_rows(tx, id)?;
                id
            }
            None => {
                tx.execute("INSERT INTO object (name) VALUES (?1)", [d.object_name])?;
                tx.last_insert_rowid()
            }
        };

        {
            let mut ins = tx.prepare(
                "INSERT INTO freeairgrip (idobject, contactpoint0, contactpoint1, contactnormal0, contactnormal1, rotmat, jawwidth)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            )?;
            for g in d.grasps {
                let [c0, c1, n0, n1] = encode_contacts(&GripContacts::of_grasp(g));
                ins.execute(params![map.object, c0, c1, n0, n1, g.hand_pose.encode(), g.jaw_width])?;
                map.grasps.insert(g.id, tx.last_insert_rowid());
            }
        }
        {
            let mut ins =
                tx.prepare("INSERT INTO freetabletopplacement (idobject, rotmat) VALUES (?1, ?2)")?;
            for p in d.placements {
                ins.execute(params![map.object, p.rotmat.encode()])?;
                map.placements.insert(p.id, tx.last_insert_rowid());
            }
        }
        {
            let mut ins = tx.prepare(
                "INSERT INTO freetabletopgrip (idfreeairgrip, idfreetabletopplacement, contactpoint0, contactpoint1, contactnormal0, contactnormal1, rotmat, jawwidth)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            )?;
            for g in d.placement_grips {
                let grasp = lookup(&map.grasps, g.freeairgrip_id, "freeairgrip")?;
                let placement = lookup(&map.placements, g.placement_id, "freetabletopplacement")?;
                let [c0, c1, n0, n1] = encode_contacts(&g.contacts);
                ins.execute(params![grasp, placement, c0, c1, n0, n1, g.hand_pose.encode(), g.jaw_width])?;
                map.placement_grips.insert(g.id, tx.last_insert_rowid());
            }
        }
        for &a in d.angles {
            let id: Option<i64> = tx
                .query_row("SELECT idangle FROM angle WHERE value = ?1", [a], |r| r.get(0))
                .optional()?;
            map.angles.push(match id {
                Some(id) => id,
                None => {
                    tx.execute("INSERT INTO angle (value) VALUES (?1)", [a])?;
                    tx.last_insert_rowid()
                }
            });
        }
        {
            let mut ins = tx.prepare(
                "INSERT INTO tabletopplacements (idfreetabletopplacement, idangle, tabletopposition, rotmat)
                 VALUES (?1, ?2, ?3, ?4)",
            )?;
            for t in &d.tabletop.placements {
                let placement = lookup(&map.placements, t.placement_id, "freetabletopplacement")?;
                let angle = *map
                    .angles
                    .get(t.angle_id)
                    .ok_or_else(|| StoreError::Integrity(format!("angle {} does not exist", t.angle_id)))?;
                ins.execute(params![placement, angle, encode_numbers(&t.position), t.world_pose.encode()])?;
                map.tabletop_placements.insert(t.id, tx.last_insert_rowid());
            }
        }
        {
            let mut ins = tx.prepare(
                "INSERT INTO tabletopgrips (idtabletopplacements, idfreeairgrip, rotmat, jawwidth, contactpoint0, contactpoint1, contactnormal0, contactnormal1)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            )?;
            for g in &d.tabletop.grips {
                let placement = lookup(&map.tabletop_placements, g.tabletopplacement_id, "tabletopplacement")?;
                let grasp = lookup(&map.grasps, g.freeairgrip_id, "freeairgrip")?;
                let [c0, c1, n0, n1] = encode_contacts(&g.contacts);
                ins.execute(params![placement, grasp, g.hand_pose.encode(), g.jaw_width, c0, c1, n0, n1])?;
                map.tabletop_grips.insert(g.id, tx.last_insert_rowid());
            }
        }
        let r = d.retraction;
        let ikret: Option<i64> = tx
            .query_row(
                "SELECT id FROM ikret WHERE handx_distance = ?1 AND worldz_distance = ?2",
                [r.handx_distance, r.worldz_distance],
                |row| row.get(0),
            )
            .optional()?;
        map.ikret = match ikret {
            Some(id) => id,
            None => {
                tx.execute(
                    "INSERT INTO ikret (handx_distance, worldz_distance) VALUES (?1, ?2)",
                    [r.handx_distance, r.worldz_distance],
                )?;
                tx.last_insert_rowid()
            }
        };
        for robot in &d.ik {
            let id: Option<i64> = tx
                .query_row("SELECT idrobot FROM robot WHERE name = ?1", [robot.name], |r| r.get(0))
                .optional()?;
            let id = match id {
                Some(id) => id,
                None => {
                    tx.execute("INSERT INTO robot (name) VALUES (?1)", [robot.name])?;
                    tx.last_insert_rowid()
                }
            };
            map.robots.push(id);
            let mut ins = tx.prepare(
                "INSERT INTO ik (idrobot, idtabletopgrips, feasibility, feasibility_handx, feasibility_handxworldz)
                 VALUES (?1, ?2, ?3, ?4, ?5)",
            )?;
            for f in robot.rows {
                let grip = lookup(&map.tabletop_grips, f.tabletopgrip_id, "tabletopgrip")?;
                ins.execute(params![id, grip, f.feasibility, f.feasibility_handx, f.feasibility_handxworldz])?;
            }
        }
        Ok(map)
    }

    fn delete_object_rows(tx: &Transaction, id: i64) -> Result<()> {
        tx.execute(
            "DELETE FROM ik WHERE idtabletopgrips IN (SELECT g.id FROM tabletopgrips g
             JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip WHERE f.idobject = ?1)",
            [id],
        )?;
        tx.execute(
            "DELETE FROM tabletopgrips WHERE idfreeairgrip IN (SELECT idfreeairgrip FROM freeairgrip WHERE idobject = ?1)",
            [id],
        )?;
        tx.execute(
            "DELETE FROM tabletopplacements WHERE idfreetabletopplacement IN (SELECT id FROM freetabletopplacement WHERE idobject = ?1)",
            [id],
        )?;
        tx.execute(
            "DELETE FROM freetabletopgrip WHERE idfreetabletopplacement IN (SELECT id FROM freetabletopplacement WHERE idobject = ?1)",
            [id],
        )?;
        tx.execute("DELETE FROM freetabletopplacement WHERE idobject = ?1", [id])?;
        tx.execute("DELETE FROM freeairgrip WHERE idobject = ?1", [id])?;
        Ok(())
    }

    pub fn free_air_grips(&self, object: i64) -> Result<Vec<FreeAirGripRow>> {
        self.ensure_object(object)?;
        let mut st = self.conn.prepare(
            "SELECT idfreeairgrip, idobject, contactpoint0, contactpoint1, contactnormal0, contactnormal1, rotmat, jawwidth
             FROM freeairgrip WHERE idobject = ?1 ORDER BY idfreeairgrip",
        )?;
        let mut rows = st.query([object])?;
        let mut out = Vec::new();
        while let Some(r) = rows.next()? {
            out.push(FreeAirGripRow {
                id: r.get(0)?,
                idobject: r.get(1)?,
                contacts: contacts_at(r, 2, "freeairgrip")?,
                rotmat: text_pose(r, 6, "freeairgrip", "rotmat")?,
                jawwidth: r.get(7)?,
            });
        }
        Ok(out)
    }

    pub fn free_placements(&self, object: i64) -> Result<Vec<FreePlacementRow>> {
        self.ensure_object(object)?;
        let mut st = self
            .conn
            .prepare("SELECT id, idobject, rotmat FROM freetabletopplacement WHERE idobject = ?1 ORDER BY id")?;
        let mut rows = st.query([object])?;
        let mut out = Vec::new();
        while let Some(r) = rows.next()? {
            out.push(FreePlacementRow {
                id: r.get(0)?,
                idobject: r.get(1)?,
                rotmat: text_pose(r, 2, "freetabletopplacement", "rotmat")?,
            });
        }
        Ok(out)
    }

    pub fn free_tabletop_grips(&self, object: i64) -> Result<Vec<FreeTabletopGripRow>> {
        self.ensure_object(object)?;
        let mut st = self.conn.prepare(
            "SELECT g.id, g.idfreeairgrip, g.idfreetabletopplacement, g.contactpoint0, g.contactpoint1, g.contactnormal0, g.contactnormal1, g.rotmat, g.jawwidth
             FROM freetabletopgrip g JOIN freetabletopplacement p ON g.idfreetabletopplacement = p.id
             WHERE p.idobject = ?1 ORDER BY g.id",
        )?;
        let mut rows = st.query([object])?;
        let mut out = Vec::new();
        while let Some(r) = rows.next()? {
            out.push(FreeTabletopGripRow {
                id: r.get(0)?,
                idfreeairgrip: r.get(1)?,
                idfreetabletopplacement: r.get(2)?,
                contacts: contacts_at(r, 3, "freetabletopgrip")?,
                rotmat: text_pose(r, 7, "freetabletopgrip", "rotmat")?,
                jawwidth: r.get(8)?,
            });
        }
        Ok(out)
    }

    pub fn angles(&self) -> Result<Vec<(i64, f64)>> {
        self.pairs_query("SELECT idangle, value FROM angle ORDER BY idangle", [])
    }

    pub fn tabletop_placements(&self, object: i64) -> Result<Vec<TabletopPlacementRow>> {
        self.ensure_object(object)?;
        let mut st = self.conn.prepare(
            "SELECT t.id, t.idfreetabletopplacement, t.idangle, t.tabletopposition, t.rotmat
             FROM tabletopplacements t JOIN freetabletopplacement p ON t.idfreetabletopplacement = p.id
             WHERE p.idobject = ?1 ORDER BY t.id",
        )?;
        let mut rows = st.query([object])?;
        let mut out = Vec::new();
        while let Some(r) = rows.next()? {
            let pos: String = r.get(3)?;
            let xy = decode_numbers(&pos)
                .ok()
                .filter(|v| v.len() == 2)
                .ok_or_else(|| StoreError::Decode {
                    table: "tabletopplacements",
                    column: "tabletopposition",
                    message: format!("expected two numbers, got '{pos}'"),
                })?;
            out.push(TabletopPlacementRow {
                id: r.get(0)?,
                idfreetabletopplacement: r.get(1)?,
                idangle: r.get(2)?,
                position: [xy[0], xy[1]],
                rotmat: text_pose(r, 4, "tabletopplacements", "rotmat")?,
            });
        }
        Ok(out)
    }

    fn grip_rows(&self, sql: &str, p: impl rusqlite::Params) -> Result<Vec<TabletopGripRow>> {
        let mut st = self.conn.prepare(sql)?;
        let mut rows = st.query(p)?;
        let mut out = Vec::new();
        while let Some(r) = rows.next()? {
            out.push(TabletopGripRow {
                id: r.get(0)?,
                idtabletopplacements: r.get(1)?,
                idfreeairgrip: r.get(2)?,
                rotmat: text_pose(r, 3, "tabletopgrips", "rotmat")?,
                jawwidth: r.get(4)?,
                contacts: contacts_at(r, 5, "tabletopgrips")?,
            });
        }
        Ok(out)
    }

    pub fn tabletop_grips(&self, object: i64) -> Result<Vec<TabletopGripRow>> {
        self.ensure_object(object)?;
        self.grip_rows(
            "SELECT g.id, g.idtabletopplacements, g.idfreeairgrip, g.rotmat, g.jawwidth, g.contactpoint0, g.contactpoint1, g.contactnormal0, g.contactnormal1
             FROM tabletopgrips g JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip
             WHERE f.idobject = ?1 ORDER BY g.id",
            [object],
        )
    }

    /// Tabletop grips with all three feasibility flags set for `robot`.
    pub fn feasible_grips(&self, object: i64, robot: i64) -> Result<Vec<TabletopGripRow>> {
        self.ensure_object(object)?;
        self.grip_rows(
            "SELECT g.id, g.idtabletopplacements, g.idfreeairgrip, g.rotmat, g.jawwidth, g.contactpoint0, g.contactpoint1, g.contactnormal0, g.contactnormal1
             FROM tabletopgrips g
             JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip
             JOIN ik ON ik.idtabletopgrips = g.id
             WHERE f.idobject = ?1 AND ik.idrobot = ?2
               AND ik.feasibility = 1 AND ik.feasibility_handx = 1 AND ik.feasibility_handxworldz = 1
             ORDER BY g.id",
            [object, robot],
        )
    }

    pub fn ik_rows(&self, object: i64, robot: i64) -> Result<Vec<IkRow>> {
        self.ensure_object(object)?;
        let mut st = self.conn.prepare(
            "SELECT ik.idrobot, ik.idtabletopgrips, ik.feasibility, ik.feasibility_handx, ik.feasibility_handxworldz
             FROM ik JOIN tabletopgrips g ON ik.idtabletopgrips = g.id
             JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip
             WHERE f.idobject = ?1 AND ik.idrobot = ?2 ORDER BY ik.idtabletopgrips",
        )?;
        let rows = st.query_map([object, robot], |r| {
            Ok(IkRow {
                idrobot: r.get(0)?,
                idtabletopgrips: r.get(1)?,
                feasibility: r.get(2)?,
                feasibility_handx: r.get(3)?,
                feasibility_handxworldz: r.get(4)?,
            })
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn ikrets(&self) -> Result<Vec<(i64, RetractionSpec)>> {
        let mut st = self
            .conn
            .prepare("SELECT id, handx_distance, worldz_distance FROM ikret ORDER BY id")?;
        let rows = st.query_map([], |r| {
            Ok((r.get(0)?, RetractionSpec { handx_distance: r.get(1)?, worldz_distance: r.get(2)? }))
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    /// Tabletop grip pairs of one object sharing a free grasp across two
    /// different tabletop placements, ordered by (smaller id, larger id).
    pub fn query_shared_grasps(&self, object: i64) -> Result<Vec<(i64, i64)>> {
        self.ensure_object(object)?;
        self.pairs_query(
            "SELECT a.id, b.id FROM tabletopgrips a
             JOIN tabletopgrips b ON a.idfreeairgrip = b.idfreeairgrip AND a.id < b.id
                                  AND a.idtabletopplacements <> b.idtabletopplacements
             JOIN freeairgrip f ON a.idfreeairgrip = f.idfreeairgrip
             WHERE f.idobject = ?1 ORDER BY a.id, b.id",
            [object],
        )
    }

    /// Tabletop grip pairs of one object sharing a tabletop placement.
    pub fn query_coplaced_grips(&self, object: i64) -> Result<Vec<(i64, i64)>> {
        self.ensure_object(object)?;
        self.pairs_query(
            "SELECT a.id, b.id FROM tabletopgrips a
             JOIN tabletopgrips b ON a.idtabletopplacements = b.idtabletopplacements AND a.id < b.id
             JOIN freeairgrip f ON a.idfreeairgrip = f.idfreeairgrip
             WHERE f.idobject = ?1 ORDER BY a.id, b.id",
            [object],
        )
    }

    pub fn row_counts(&self) -> Result<Vec<(&'static str, i64)>> {
        TABLES
            .iter()
            .map(|(t, _, _)| {
                let n: i64 = self.conn.query_row(&format!("SELECT COUNT(*) FROM {t}"), [], |r| r.get(0))?;
                Ok((*t, n))
            })
            .collect()
    }

    /// Full foreign-key scan plus the cardinality laws linking placements,
    /// positions and angles, and feasibility rows to grips.
    pub fn audit(&self) -> Result<AuditReport> {
        let mut rep = AuditReport::default();
        let mut st = self.conn.prepare("PRAGMA foreign_key_check")?;
        let mut rows = st.query([])?;
        while let Some(r) = rows.next()? {
            let table: String = r.get(0)?;
            let rowid: Option<i64> = r.get(1)?;
            let parent: String = r.get(2)?;
            rep.foreign_key_violations
                .push(format!("{table} row {rowid:?} references a missing {parent} row"));
        }
        for (obj, name) in self.objects()? {
            let (placements, instances, positions, angles): (i64, i64, i64, i64) = self.conn.query_row(
                "SELECT COUNT(DISTINCT p.id), COUNT(t.id), COUNT(DISTINCT t.tabletopposition), COUNT(DISTINCT t.idangle)
                 FROM freetabletopplacement p LEFT JOIN tabletopplacements t ON t.idfreetabletopplacement = p.id
                 WHERE p.idobject = ?1",
                [obj],
                |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)),
            )?;
            if instances != placements * positions * angles {
                rep.cardinality_violations.push(format!(
                    "object '{name}': {instances} tabletop placements != {placements} placements x {positions} positions x {angles} angles"
                ));
            }
            let mismatched: i64 = self.conn.query_row(
                "SELECT COUNT(*) FROM tabletopgrips g
                 JOIN tabletopplacements t ON g.idtabletopplacements = t.id
                 JOIN freetabletopplacement p ON t.idfreetabletopplacement = p.id
                 JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip
                 WHERE f.idobject = ?1 AND p.idobject <> f.idobject",
                [obj],
                |r| r.get(0),
            )?;
            if mismatched > 0 {
                rep.cardinality_violations
                    .push(format!("object '{name}': {mismatched} tabletop grips mix objects"));
            }
            let missing_source: i64 = self.conn.query_row(
                "SELECT COUNT(*) FROM tabletopgrips g
                 JOIN tabletopplacements t ON g.idtabletopplacements = t.id
                 JOIN freeairgrip f ON g.idfreeairgrip = f.idfreeairgrip
                 WHERE f.idobject = ?1 AND NOT EXISTS (
                     SELECT 1 FROM freetabletopgrip s
                     WHERE s.idfreeairgrip = g.idfreeairgrip AND s.idfreetabletopplacement = t.idfreetabletopplacement)",
                [obj],
                |r| r.get(0),
            )?;
            if missing_source > 0 {
                rep.cardinality_violations.push(format!(
                    "object '{name}': {missing_source} tabletop grips have no matching placement grip"
                ));
            }
        }
        let counts: HashMap<&str, i64> = self.row_counts()?.into_iter().collect();
        if counts["ik"] > counts["robot"] * counts["tabletopgrips"] {
            rep.cardinality_violations.push(format!(
                "{} ik rows exceed {} robots x {} tabletop grips",
                counts["ik"], counts["robot"], counts["tabletopgrips"]
            ));
        }
        Ok(rep)
    }

    /// Writes one table as CSV ordered by primary key. Reals use 17
    /// significant digits so the output is byte-stable.
    pub fn export_csv(&self, table: &str, out: &mut dyn Write) -> Result<()> {
        let (name, pk, cols) = TABLES
            .iter()
            .find(|t| t.0 == table)
            .ok_or_else(|| StoreError::Integrity(format!("no table named '{table}'")))?;
        writeln!(out, "{}", cols.join(","))?;
        let mut st = self
            .conn
            .prepare(&format!("SELECT {} FROM {name} ORDER BY {}", cols.join(", "), pk.join(", ")))?;
        let mut rows = st.query([])?;
        let mut line = Vec::with_capacity(cols.len());
        while let Some(r) = rows.next()? {
            line.clear();
            for i in 0..cols.len() {
                line.push(csv_field(r.get_ref(i)?));
            }
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// One `<table>.csv` per table in `dir`.
    pub fn export_all_csv(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (t, _, _) in TABLES {
            let path = dir.join(format!("{t}.csv"));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            self.export_csv(t, &mut f)?;
            f.flush()?;
            out.push(path);
        }
        Ok(out)
    }
}
