//! Minimal HTTP/1.1 stub of the compound service. Serves canned responses by
//! path and records every request path it receives.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::sync::{Arc, Mutex};
use std::thread;

#[derive(Clone)]
pub struct Reply {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(body: &str) -> Self {
        Reply { status: 200, body: body.as_bytes().to_vec() }
    }
    pub fn bytes(body: &[u8]) -> Self {
        Reply { status: 200, body: body.to_vec() }
    }
    pub fn status(status: u16) -> Self {
        Reply { status, body: b"{}".to_vec() }
    }
}

pub struct Stub {
    pub addr: SocketAddr,
    pub requests: Arc<Mutex<Vec<String>>>,
}

impl Stub {
    /// Unrouted paths answer 404.
    pub fn start(routes: HashMap<String, Reply>) -> Stub {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    continue;
                }
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                }
                let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
                log.lock().unwrap().push(path.clone());
                let reply = routes.get(&path).cloned().unwrap_or(Reply::status(404));
                let head = format!(
                    "HTTP/1.1 {} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                    reply.status,
                    reply.body.len()
                );
                let _ = stream.write_all(head.as_bytes());
                let _ = stream.write_all(&reply.body);
            }
        });
        Stub { addr, requests }
    }

    pub fn base(&self) -> String {
        format!("http://{}/rest/pug", self.addr)
    }

    pub fn hits(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

pub const PROPS: &str = "Title,IUPACName,MolecularFormula,MolecularWeight";

pub fn props_path(by: &str, key: &str) -> String {
    format!("/rest/pug/compound/{by}/{key}/property/{PROPS}/JSON")
}

pub fn property_table(cid: u64, title: &str, formula: &str, weight: &str) -> String {
    format!(
        r#"{{"PropertyTable":{{"Properties":[{{"CID":{cid},"Title":"{title}","IUPACName":"{title} (iupac)","MolecularFormula":"{formula}","MolecularWeight":"{weight}"}}]}}}}"#
    )
}
