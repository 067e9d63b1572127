/// Bumped whenever the table layout changes.
pub const SCHEMA_VERSION: i64 = 1;

/// Table name, primary-key columns and column list, in creation order.
pub const TABLES: &[(&str, &[&str], &[&str])] = &[
    ("object", &["idobject"], &["idobject", "name"]),
    ("robot", &["idrobot"], &["idrobot", "name"]),
    (
        "freeairgrip",
        &["idfreeairgrip"],
        &[
            "idfreeairgrip",
            "idobject",
            "contactpoint0",
            "contactpoint1",
            "contactnormal0",
            "contactnormal1",
            "rotmat",
            "jawwidth",
        ],
    ),
    ("freetabletopplacement", &["id"], &["id", "idobject", "rotmat"]),
    (
        "freetabletopgrip",
        &["id"],
        &[
            "id",
            "idfreeairgrip",
            "idfreetabletopplacement",
            "contactpoint0",
            "contactpoint1",
            "contactnormal0",
            "contactnormal1",
            "rotmat",
            "jawwidth",
        ],
    ),
    ("angle", &["idangle"], &["idangle", "value"]),
    (
        "tabletopplacements",
        &["id"],
        &["id", "idfreetabletopplacement", "idangle", "tabletopposition", "rotmat"],
    ),
    (
        "tabletopgrips",
        &["id"],
        &[
            "id",
            "idtabletopplacements",
            "idfreeairgrip",
            "rotmat",
            "jawwidth",
            "contactpoint0",
            "contactpoint1",
            "contactnormal0",
            "contactnormal1",
        ],
    ),
    ("ikret", &["id"], &["id", "handx_distance", "worldz_distance"]),
    (
        "ik",
        &["idrobot", "idtabletopgrips"],
        &["idrobot", "idtabletopgrips", "feasibility", "feasibility_handx", "feasibility_handxworldz"],
    ),
];

pub const DDL: &str = "
CREATE TABLE object (
    idobject INTEGER PRIMARY KEY,
    name TEXT NOT NULL UNIQUE
);
CREATE TABLE robot (
    idrobot INTEGER PRIMARY KEY,
    name TEXT NOT NULL UNIQUE
);
CREATE TABLE freeairgrip (
    idfreeairgrip INTEGER PRIMARY KEY,
    idobject INTEGER NOT NULL REFERENCES object(idobject),
    contactpoint0 TEXT NOT NULL,
    contactpoint1 TEXT NOT NULL,
    contactnormal0 TEXT NOT NULL,
    contactnormal1 TEXT NOT NULL,
    rotmat TEXT NOT NULL,
    jawwidth REAL NOT NULL
);
CREATE TABLE freetabletopplacement (
    id INTEGER PRIMARY KEY,
    idobject INTEGER NOT NULL REFERENCES object(idobject),
    rotmat TEXT NOT NULL
);
CREATE TABLE freetabletopgrip (
    id INTEGER PRIMARY KEY,
    idfreeairgrip INTEGER NOT NULL REFERENCES freeairgrip(idfreeairgrip),
    idfreetabletopplacement INTEGER NOT NULL REFERENCES freetabletopplacement(id),
    contactpoint0 TEXT NOT NULL,
    contactpoint1 TEXT NOT NULL,
    contactnormal0 TEXT NOT NULL,
    contactnormal1 TEXT NOT NULL,
    rotmat TEXT NOT NULL,
    jawwidth REAL NOT NULL
);
CREATE TABLE angle (
    idangle INTEGER PRIMARY KEY,
    value REAL NOT NULL UNIQUE
);
CREATE TABLE tabletopplacements (
    id INTEGER PRIMARY KEY,
    idfreetabletopplacement INTEGER NOT NULL REFERENCES freetabletopplacement(id),
    idangle INTEGER NOT NULL REFERENCES angle(idangle),
    tabletopposition TEXT NOT NULL,
    rotmat TEXT NOT NULL
);
CREATE TABLE tabletopgrips (
    id INTEGER PRIMARY KEY,
    idtabletopplacements INTEGER NOT NULL REFERENCES tabletopplacements(id),
    idfreeairgrip INTEGER NOT NULL REFERENCES freeairgrip(idfreeairgrip),
    rotmat TEXT NOT NULL,
    jawwidth REAL NOT NULL,
    contactpoint0 TEXT NOT NULL,
    contactpoint1 TEXT NOT NULL,
    contactnormal0 TEXT NOT NULL,
    contactnormal1 TEXT NOT NULL
);
CREATE TABLE ikret (
    id INTEGER PRIMARY KEY,
    handx_distance REAL NOT NULL,
    worldz_distance REAL NOT NULL
);
CREATE TABLE ik (
    idrobot INTEGER NOT NULL REFERENCES robot(idrobot),
    idtabletopgrips INTEGER NOT NULL REFERENCES tabletopgrips(id),
    feasibility INTEGER NOT NULL,
    feasibility_handx INTEGER NOT NULL,
    feasibility_handxworldz INTEGER NOT NULL,
    PRIMARY KEY (idrobot, idtabletopgrips)
);
CREATE INDEX freeairgrip_object ON freeairgrip(idobject);
CREATE INDEX freetabletopplacement_object ON freetabletopplacement(idobject);
CREATE INDEX freetabletopgrip_placement ON freetabletopgrip(idfreetabletopplacement);
CREATE INDEX tabletopplacements_placement ON tabletopplacements(idfreetabletopplacement);
CREATE INDEX tabletopgrips_placement ON tabletopgrips(idtabletopplacements);
CREATE INDEX tabletopgrips_grasp ON tabletopgrips(idfreeairgrip);
CREATE INDEX ik_grip ON ik(idtabletopgrips);
";
