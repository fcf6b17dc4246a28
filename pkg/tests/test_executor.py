"""Execution layer: outcomes, canonical digests, fixture store, and the
wire-protocol client against a scripted in-process server."""

import hashlib
import hmac
import json
import socket
import struct
import threading

import pytest

from sqlxd.errors import ConnectionLost
from sqlxd.executor import (
    ExecOutcome,
    FixtureExecutor,
    FixtureStore,
    LiveExecutor,
    canonical_digest,
    error_outcome,
    execute,
    explain,
    record_from_outcome,
    rows_outcome,
)
from sqlxd.parse import parse
from sqlxd.sqlast import POSTGRESQL, QUESTDB


class TestExecOutcome:
    def test_exactly_one_side_populated(self):
        with pytest.raises(ValueError):
            ExecOutcome("rows", rows=((1,),), column_types=("integer",), error_text="x")
        with pytest.raises(ValueError):
            ExecOutcome("error")

    def test_arity_matches_column_types(self):
        with pytest.raises(ValueError):
            rows_outcome([[1, 2]], ["integer"])


class TestDigest:
    def test_formatting_differences_collapse(self):
        a = canonical_digest("select   1")
        b = canonical_digest("SELECT 1")
        assert a == b

    def test_structural_difference_distinguishes(self):
        assert canonical_digest("SELECT 1") != canonical_digest("SELECT 2")

    def test_out_of_grammar_text_degrades_to_normalized(self):
        assert canonical_digest("DROP TABLE x") == canonical_digest("drop   table x")


class TestFixtureStore:
    def test_round_trip_through_records(self, tmp_path):
        outcome = rows_outcome([[1, None]], ["integer", "boolean"], plan_text="Result")
        record = record_from_outcome("ep", "SELECT 1, NULL", outcome)
        path = tmp_path / "f.jsonl"
        path.write_text(json.dumps(record) + "\n")
        store = FixtureStore.load(path)
        loaded = store.get("ep", "select  1, null")
        assert loaded.rows == ((1, None),)
        assert loaded.plan_text == "Result"

    def test_miss_produces_fixture_miss_error(self):
        ex = FixtureExecutor(FixtureStore(), "ep", QUESTDB)
        out = ex.execute_text("SELECT 1")
        assert out.status == "error" and out.error_text.startswith("FIXTURE_MISS")

    def test_execute_renders_for_executor_dialect(self, listing_store):
        ex = FixtureExecutor(listing_store, "questdb", QUESTDB)
        stmt = parse("SELECT (c0 IN (0, NULL)) FROM test")
        out = execute(stmt, ex)
        assert out.rows == ((True,),)

    def test_explain_absent_without_stored_plan(self, listing_store):
        ex = FixtureExecutor(listing_store, "questdb", QUESTDB)
        assert explain(parse("SELECT (c0 IN (0, NULL)) FROM test"), ex) is None

    def test_replay_is_deterministic(self, listing_store):
        ex = FixtureExecutor(listing_store, "postgresql", POSTGRESQL)
        sql = "SELECT count(DISTINCT c_0) FROM test WHERE c_0 > 'Z'"
        assert ex.execute_text(sql) == ex.execute_text(sql)
        assert ex.explain_text(sql) == ex.explain_text(sql)


# ---------------------------------------------------------------------------
# Scripted wire-protocol server
# ---------------------------------------------------------------------------


class FakeServer(threading.Thread):
    """Speaks just enough of the v3 protocol for one connection."""

    def __init__(self, auth="trust", password="pw", user="u"):
        super().__init__(daemon=True)
        self.auth = auth
        self.password = password
        self.user = user
        self.sock = socket.socket()
        self.sock.bind(("127.0.0.1", 0))
        self.sock.listen(1)
        self.port = self.sock.getsockname()[1]
        self.failures = []

    # -- framing helpers --

    def _send(self, conn, type_byte, payload=b""):
        conn.sendall(type_byte + struct.pack("!I", len(payload) + 4) + payload)

    def _read_startup(self, conn):
        (length,) = struct.unpack("!I", self._exact(conn, 4))
        return self._exact(conn, length - 4)

    def _read_message(self, conn):
        t = self._exact(conn, 1)
        (length,) = struct.unpack("!I", self._exact(conn, 4))
        return t, self._exact(conn, length - 4)

    def _exact(self, conn, n):
        buf = b""
        while len(buf) < n:
            chunk = conn.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("client closed")
            buf += chunk
        return buf

    def run(self):
        conn, _ = self.sock.accept()
        try:
            self._read_startup(conn)
            self._authenticate(conn)
            self._send(conn, b"R", struct.pack("!I", 0))
            self._send(conn, b"Z", b"I")
            while True:
                t, body = self._read_message(conn)
                if t == b"X":
                    return
                if t == b"Q":
                    self._answer(conn, body.rstrip(b"\x00").decode())
        except ConnectionError:
            pass
        finally:
            conn.close()
            self.sock.close()

    def _authenticate(self, conn):
        if self.auth == "trust":
            return
        if self.auth == "cleartext":
            self._send(conn, b"R", struct.pack("!I", 3))
            t, body = self._read_message(conn)
            if t != b"p" or body.rstrip(b"\x00").decode() != self.password:
                self.failures.append("bad cleartext password")
            return
        if self.auth == "md5":
            salt = b"\x01\x02\x03\x04"
            self._send(conn, b"R", struct.pack("!I", 5) + salt)
            t, body = self._read_message(conn)
            inner = hashlib.md5((self.password + self.user).encode()).hexdigest()
            want = "md5" + hashlib.md5(inner.encode() + salt).hexdigest()
            if body.rstrip(b"\x00").decode() != want:
                self.failures.append("bad md5 response")
            return
        if self.auth == "scram":
            self._send(conn, b"R", struct.pack("!I", 10) + b"SCRAM-SHA-256\x00\x00")
            t, body = self._read_message(conn)
            idx = body.index(b"\x00")
            (n,) = struct.unpack("!I", body[idx + 1: idx + 5])
            client_first = body[idx + 5: idx + 5 + n].decode()
            client_nonce = dict(f.split("=", 1) for f in client_first[3:].split(","))["r"]
            salt, iterations = b"saltsalt", 4096
            server_nonce = client_nonce + "srv"
            server_first = (
                f"r={server_nonce},s={__import__('base64').b64encode(salt).decode()},i={iterations}"
            )
            self._send(conn, b"R", struct.pack("!I", 11) + server_first.encode())
            t, body = self._read_message(conn)
            client_final = body.decode()
            proof_b64 = client_final.split(",p=", 1)[1]
            salted = hashlib.pbkdf2_hmac("sha256", self.password.encode(), salt, iterations)
            client_key = hmac.new(salted, b"Client Key", hashlib.sha256).digest()
            stored = hashlib.sha256(client_key).digest()
            bare = client_first[3:]
            without_proof = client_final.rsplit(",p=", 1)[0]
            auth_message = ",".join((bare, server_first, without_proof)).encode()
            signature = hmac.new(stored, auth_message, hashlib.sha256).digest()
            want = bytes(a ^ b for a, b in zip(client_key, signature))
            import base64

            if base64.b64decode(proof_b64) != want:
                self.failures.append("bad scram proof")
            self._send(conn, b"R", struct.pack("!I", 12) + b"v=ignored")
            return

    def _answer(self, conn, sql):
        if sql == "SELECT 1":
            # one int4 column named x
            desc = struct.pack("!H", 1) + b"x\x00" + struct.pack("!IHIHiH", 0, 0, 23, 4, -1, 0)
            self._send(conn, b"T", desc)
            self._send(conn, b"D", struct.pack("!H", 1) + struct.pack("!i", 1) + b"1")
            self._send(conn, b"C", b"SELECT 1\x00")
        elif sql.startswith("NULLROW"):
            desc = struct.pack("!H", 1) + b"x\x00" + struct.pack("!IHIHiH", 0, 0, 16, 1, -1, 0)
            self._send(conn, b"T", desc)
            self._send(conn, b"D", struct.pack("!H", 1) + struct.pack("!i", -1))
            self._send(conn, b"C", b"SELECT 1\x00")
        elif sql.startswith("BOOM"):
            self._send(conn, b"E", b"SERROR\x00C42601\x00Msyntax error at or near \"BOOM\"\x00\x00")
        self._send(conn, b"Z", b"I")


def _client(server, **kw):
    return LiveExecutor("t", POSTGRESQL, "127.0.0.1", server.port, kw.pop("user", "u"),
                        "db", timeout=5.0, connect_retries=0, **kw)


class TestWireClient:
    @pytest.mark.parametrize("auth", ["trust", "cleartext", "md5", "scram"])
    def test_authentication_and_query(self, auth):
        server = FakeServer(auth=auth)
        server.start()
        ex = LiveExecutor("t", POSTGRESQL, "127.0.0.1", server.port, "u", "db", timeout=5.0)
        import os

        os.environ.pop("X", None)
        ex._params["password"] = "pw"
        out = ex.execute_text("SELECT 1")
        ex.close()
        server.join(timeout=5)
        assert server.failures == []
        assert out.status == "rows"
        assert out.rows == ((1,),)
        assert out.column_types == ("integer",)

    def test_null_values_decoded(self):
        server = FakeServer()
        server.start()
        ex = _client(server)
        out = ex.execute_text("NULLROW")
        ex.close()
        assert out.rows == ((None,),)
        assert out.column_types == ("boolean",)

    def test_error_response_surfaced_as_outcome(self):
        server = FakeServer()
        server.start()
        ex = _client(server)
        out = ex.execute_text("BOOM")
        ex.close()
        assert out.status == "error"
        assert "syntax error" in out.error_text

    def test_unreachable_endpoint_raises_connection_lost(self):
        ex = LiveExecutor("t", POSTGRESQL, "127.0.0.1", 1, "u", "db",
                          timeout=0.5, connect_retries=0)
        with pytest.raises(ConnectionLost):
            ex.execute_text("SELECT 1")
