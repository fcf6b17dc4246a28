"""Minimal client for the PostgreSQL v3 wire protocol (simple query flow).

Covers startup, trust/cleartext/md5/SCRAM-SHA-256 authentication, and the
simple query cycle with text-format results. This is all the harness needs:
the supported emerging systems expose protocol-compatible endpoints, so the
same client drives both sides of a differential pair.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import os
import socket
import struct

from .errors import ConnectionLost
from .sqlast import BIGINT, BOOLEAN, FLOAT, INTEGER, STRING, TIMESTAMP

PROTOCOL_VERSION = 196608  # 3.0

_AUTH_OK = 0
_AUTH_CLEARTEXT = 3
_AUTH_MD5 = 5
_AUTH_SASL = 10
_AUTH_SASL_CONTINUE = 11
_AUTH_SASL_FINAL = 12

# type OID -> abstract type variant; unknown OIDs fall back to string
_OID_TYPES = {
    16: BOOLEAN,
    20: BIGINT,
    21: INTEGER,
    23: INTEGER,
    700: FLOAT,
    701: FLOAT,
    1700: FLOAT,
    25: STRING,
    1043: STRING,
    1042: STRING,
    1114: TIMESTAMP,
    1184: TIMESTAMP,
}


def _convert(text, variant):
    if text is None:
        return None
    if variant == BOOLEAN:
        return text in ("t", "true", "T", "TRUE")
    if variant == INTEGER or variant == BIGINT:
        return int(text)
    if variant == FLOAT:
        return float(text)
    return text


class Connection:
    def __init__(self, host, port, user, database, password=None, timeout=30.0):
        self.user = user
        self.password = password or ""
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.settimeout(timeout)
        self._buffer = b""
        try:
            self._startup(user, database)
        except Exception:
            self.sock.close()
            raise

    # -- framing -------------------------------------------------------------

    def _send(self, type_byte, payload: bytes):
        header = struct.pack("!I", len(payload) + 4)
        self.sock.sendall((type_byte.encode() if type_byte else b"") + header + payload)

    def _recv_exact(self, n: int) -> bytes:
        while len(self._buffer) < n:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise TimeoutError("server response timed out")
            if not chunk:
                raise ConnectionLost("server closed the connection")
            self._buffer += chunk
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def _read_message(self):
        type_byte = self._recv_exact(1)
        (length,) = struct.unpack("!I", self._recv_exact(4))
        return type_byte, self._recv_exact(length - 4)

    # -- startup and authentication -------------------------------------------

    def _startup(self, user, database):
        params = b""
        for key, value in (("user", user), ("database", database)):
            params += key.encode() + b"\x00" + value.encode() + b"\x00"
        payload = struct.pack("!I", PROTOCOL_VERSION) + params + b"\x00"
        self.sock.sendall(struct.pack("!I", len(payload) + 4) + payload)
        while True:
            mtype, body = self._read_message()
            if mtype == b"R":
                self._authenticate(body)
            elif mtype == b"E":
                raise ConnectionLost(_error_text(body))
            elif mtype == b"Z":
                return
            # 'S' parameter status and 'K' backend key data are ignored

    def _authenticate(self, body: bytes):
        (code,) = struct.unpack("!I", body[:4])
        if code == _AUTH_OK:
            return
        if code == _AUTH_CLEARTEXT:
            self._send("p", self.password.encode() + b"\x00")
        elif code == _AUTH_MD5:
            salt = body[4:8]
            inner = hashlib.md5((self.password + self.user).encode()).hexdigest()
            digest = hashlib.md5(inner.encode() + salt).hexdigest()
            self._send("p", b"md5" + digest.encode() + b"\x00")
        elif code == _AUTH_SASL:
            mechanisms = body[4:].split(b"\x00")
            if b"SCRAM-SHA-256" not in mechanisms:
                raise ConnectionLost("server offers no supported SASL mechanism")
            self._scram()
        else:
            raise ConnectionLost(f"unsupported authentication request {code}")

    def _scram(self):
        nonce = base64.b64encode(os.urandom(18)).decode()
        first_bare = f"n={self.user},r={nonce}"
        initial = ("n,," + first_bare).encode()
        payload = b"SCRAM-SHA-256\x00" + struct.pack("!I", len(initial)) + initial
        self._send("p", payload)

        mtype, body = self._read_message()
        if mtype == b"E":
            raise ConnectionLost(_error_text(body))
        (code,) = struct.unpack("!I", body[:4])
        if code != _AUTH_SASL_CONTINUE:
            raise ConnectionLost("expected SASL continue")
        server_first = body[4:].decode()
        fields = dict(item.split("=", 1) for item in server_first.split(","))
        server_nonce = fields["r"]
        salt = base64.b64decode(fields["s"])
        iterations = int(fields["i"])
        if not server_nonce.startswith(nonce):
            raise ConnectionLost("server nonce mismatch")

        salted = hashlib.pbkdf2_hmac("sha256", self.password.encode(), salt, iterations)
        client_key = hmac.new(salted, b"Client Key", hashlib.sha256).digest()
        stored_key = hashlib.sha256(client_key).digest()
        final_without_proof = f"c=biws,r={server_nonce}"
        auth_message = ",".join((first_bare, server_first, final_without_proof)).encode()
        signature = hmac.new(stored_key, auth_message, hashlib.sha256).digest()
        proof = bytes(a ^ b for a, b in zip(client_key, signature))
        final = f"{final_without_proof},p={base64.b64encode(proof).decode()}"
        self._send("p", final.encode())

        mtype, body = self._read_message()
        if mtype == b"E":
            raise ConnectionLost(_error_text(body))
        (code,) = struct.unpack("!I", body[:4])
        if code != _AUTH_SASL_FINAL:
            raise ConnectionLost("expected SASL final")

    # -- simple query ----------------------------------------------------------

    def simple_query(self, sql: str):
        """Run one statement; returns (column type variants, typed rows, error).

        Text-format results only. The error is the server's message string,
        None on success.
        """
        self._send("Q", sql.encode() + b"\x00")
        columns = []
        rows = []
        error = None
        while True:
            mtype, body = self._read_message()
            if mtype == b"T":
                columns = _parse_row_description(body)
            elif mtype == b"D":
                rows.append(_parse_data_row(body, columns))
            elif mtype == b"E":
                if error is None:
                    error = _error_text(body)
            elif mtype == b"Z":
                if error is not None:
                    return (), (), error
                return tuple(v for _, v in columns), tuple(rows), None
            # 'C' command complete, 'N' notice, 'I' empty query: skip

    def close(self):
        try:
            self._send("X", b"")
        except OSError:
            pass
        self.sock.close()


def _parse_row_description(body: bytes):
    (count,) = struct.unpack("!H", body[:2])
    offset = 2
    columns = []
    for _ in range(count):
        end = body.index(b"\x00", offset)
        name = body[offset:end].decode()
        offset = end + 1
        # table oid i32, attnum i16, type oid i32, typlen i16, typmod i32, format i16
        (oid,) = struct.unpack("!I", body[offset + 6: offset + 10])
        offset += 18
        columns.append((name, _OID_TYPES.get(oid, STRING)))
    return columns


def _parse_data_row(body: bytes, columns):
    (count,) = struct.unpack("!H", body[:2])
    offset = 2
    values = []
    for i in range(count):
        (length,) = struct.unpack("!i", body[offset:offset + 4])
        offset += 4
        if length == -1:
            values.append(None)
            continue
        text = body[offset:offset + length].decode()
        offset += length
        variant = columns[i][1] if i < len(columns) else STRING
        values.append(_convert(text, variant))
    return tuple(values)


def _error_text(body: bytes) -> str:
    fields = {}
    for item in body.split(b"\x00"):
        if item:
            fields[chr(item[0])] = item[1:].decode(errors="replace")
    message = fields.get("M", "unknown error")
    severity = fields.get("S", "")
    return f"{severity}: {message}" if severity else message
