"""HTTP/JSON service and CLI for a live single-host election.

The service exposes the voter-facing surface the web UI consumes. Identifier
delivery over HTTP is a simulated-QKD handshake: the response carries the
one-time-pad-encrypted package together with the receiving end's key bits and
session metadata, standing in for a physical quantum channel. Vote signing is
client-side; the service never sees OTS secret keys and never persists
plaintext VIDs or BIDs outside the authority's encrypted database.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable

from . import sig as ots
from .audit import audit_election, verify_my_vote
from .authority import (
    AlreadyRegistered,
    BallotAlreadyActive,
    CredentialRejected,
    DeliveryPackage,
    ElectionClosed,
    NoActiveBallot,
    NotRegistered,
    VotingAuthority,
    commitments_from_json,
    commitments_to_json,
)
from .config import ElectionConfig
from .consensus import ConsensusEngine, MinerRoster, authenticate_vote
from .entropy import Id256, SeededTestSource, SimulatedBeamsplitter
from .ledger import Chain, VoteRecord, block_hash, chain_from_json, chain_to_json, pair_digest
from .simnet import NetConfig, run_scenario, scenario_from_dict
from .tally import tally

__all__ = ["ElectionService", "ApiError", "create_app", "main"]

CLOCK_SKEW_MS = 60_000


class ApiError(Exception):
    def __init__(self, status: int, reason: str):
        super().__init__(reason)
        self.status = status
        self.reason = reason


def _package_to_dict(pkg: DeliveryPackage) -> dict:
    return {
        "ciphertext": pkg.ciphertext.data.hex(),
        "key_offset": pkg.ciphertext.key_offset,
        "key_bits": pkg.key_bits,
        "va_signature": ots.serialize_signature(pkg.va_signature),
        "va_public": ots.serialize_public(pkg.va_public),
        "qkd_session": pkg.session_record,
    }


def open_package(pkg: dict) -> bytes:
    """Client-side: decrypt a delivery package and check the VA signature."""
    from .qkd import OneTimePad, OtpCiphertext

    pad = OneTimePad(pkg["key_bits"])
    payload = pad.decrypt(OtpCiphertext(pkg["key_offset"], bytes.fromhex(pkg["ciphertext"])))
    public = ots.deserialize_public(pkg["va_public"])
    signature = ots.deserialize_signature(pkg["va_signature"])
    if not ots.verify(public, payload, signature):
        raise ValueError("authority signature on delivery failed to verify")
    return payload


class ElectionService:
    """All state transitions delegate to the authority/consensus/tally modules;
    the service adds HTTP plumbing and a clock."""

    def __init__(
        self,
        config: ElectionConfig,
        clock: Callable[[], int] | None = None,
        deterministic: bool = False,
    ):
        self.config = config
        self.clock = clock or (lambda: int(time.time() * 1000))
        entropy_cls = (
            (lambda s: SeededTestSource(s)) if deterministic else (lambda s: SimulatedBeamsplitter(0.5, s))
        )
        self.va = VotingAuthority(config, entropy_cls(config.seed))
        self.roster = MinerRoster.from_names(config.miners)
        self.engine = ConsensusEngine(config, self.roster, entropy_cls(config.seed ^ 0x5EED))

    # -- mutations ------------------------------------------------------------

    def register(self, credential: str, ots_public_digest_hex: str) -> dict:
        try:
            pkg = self.va.register(
                credential, lambda c: bool(c), bytes.fromhex(ots_public_digest_hex), self.clock()
            )
        except AlreadyRegistered:
            raise ApiError(400, "AlreadyRegistered")
        except CredentialRejected:
            raise ApiError(400, "CredentialRejected")
        except ElectionClosed:
            raise ApiError(403, "ElectionClosed")
        return {"package": _package_to_dict(pkg)}

    def ballot(self, vid_hex: str) -> dict:
        try:
            pkg = self.va.issue_ballot(Id256(vid_hex), self.clock())
        except NotRegistered:
            raise ApiError(404, "NotRegistered")
        except BallotAlreadyActive:
            raise ApiError(409, "BallotAlreadyActive")
        except ElectionClosed:
            raise ApiError(403, "ElectionClosed")
        return {"package": _package_to_dict(pkg)}

    def reballot(self, vid_hex: str, ots_public_digest_hex: str | None) -> dict:
        digest = bytes.fromhex(ots_public_digest_hex) if ots_public_digest_hex else None
        try:
            pkg = self.va.reissue_ballot(Id256(vid_hex), self.clock(), digest)
        except NotRegistered:
            raise ApiError(404, "NotRegistered")
        except NoActiveBallot:
            raise ApiError(409, "NoActiveBallot")
        except ElectionClosed:
            raise ApiError(403, "ElectionClosed")
        return {"package": _package_to_dict(pkg)}

    def vote(self, record: dict) -> dict:
        now = self.clock()
        try:
            v = VoteRecord(
                pair_digest=bytes.fromhex(record["pair_digest"]),
                choice=int(record["choice"]),
                cast_at=int(record["cast_at"]),
                signature=ots.deserialize_signature(record["signature"]),
                signer_public=ots.deserialize_public(record["signer_public"]),
            )
        except (KeyError, ValueError):
            raise ApiError(422, "MalformedVote")
        if abs(v.cast_at - now) > CLOCK_SKEW_MS:
            raise ApiError(422, "TimestampOutOfBounds")
        verdict = authenticate_vote(
            v,
            self.va.publish_commitments(),
            len(self.config.candidates),
            self.config.cutoff,
        )
        if not verdict.accept:
            raise ApiError(422, verdict.reason)
        self.engine.submit_vote(now, v)
        outcome = self.engine.run_slot(self.va.publish_commitments(), now)
        height = len(self.engine.chain) - 1 if outcome == "committed" else None
        return {"status": outcome if outcome == "committed" else "pending", "block_height": height}

    # -- reads ----------------------------------------------------------------

    def chain_doc(self) -> dict:
        return json.loads(chain_to_json(self.engine.chain))

    def block(self, height: int) -> dict:
        if not 0 <= height < len(self.engine.chain):
            raise ApiError(404, "NoSuchBlock")
        return self.chain_doc()["blocks"][height]

    def commitments_doc(self) -> list:
        return json.loads(commitments_to_json(self.va.publish_commitments()))

    def verify(self, vid_hex: str, bid_hex: str) -> dict:
        digest = pair_digest(Id256(vid_hex), Id256(bid_hex))
        closed = self.clock() >= self.config.cutoff
        locations = []
        for height, index, v in self.engine.chain.all_votes():
            if v.pair_digest == digest:
                locations.append({"height": height, "index": index, "counted": None})
        if closed and locations:
            locs = verify_my_vote(
                self.engine.chain,
                self.va.publish_commitments(),
                Id256(vid_hex),
                Id256(bid_hex),
                self.config.cutoff,
                len(self.config.candidates),
            )
            locations = [
                {"height": l.height, "index": l.index, "counted": l.counted}
                for l in locs
                if l.found
            ]
        return {"found": bool(locations), "locations": locations}

    def tally_doc(self) -> dict:
        if self.clock() < self.config.cutoff:
            raise ApiError(409, "ElectionOpen")
        result = tally(
            self.engine.chain,
            self.va.publish_commitments(),
            self.config.cutoff,
            len(self.config.candidates),
        )
        return result.to_dict()

    def audit_doc(self) -> dict:
        if self.clock() < self.config.cutoff:
            raise ApiError(409, "ElectionOpen")
        result = tally(
            self.engine.chain,
            self.va.publish_commitments(),
            self.config.cutoff,
            len(self.config.candidates),
        )
        report = audit_election(
            self.engine.chain,
            self.va.publish_commitments(),
            result,
            self.config.cutoff,
            len(self.config.candidates),
        )
        return report.to_dict()

    def status(self) -> dict:
        return {
            "election_id": self.config.election_id,
            "candidates": list(self.config.candidates),
            "now": self.clock(),
            "registration_open": self.config.registration_open,
            "voting_open": self.config.voting_open,
            "cutoff": self.config.cutoff,
            "chain_height": len(self.engine.chain) - 1,
            "chain_tip_hash": block_hash(self.engine.chain.tip).hex(),
            "commitments": len(self.va.publish_commitments()),
            "pending_votes": len(self.engine.pool),
        }


def create_app(service: ElectionService):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="qbvote gateway")

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.status, "reason": exc.reason}
        )

    @app.post("/register")
    async def register(body: dict):
        return service.register(body.get("credential", ""), body.get("ots_public_digest", ""))

    @app.post("/ballot")
    async def ballot(body: dict):
        return service.ballot(body.get("vid", ""))

    @app.post("/reballot")
    async def reballot(body: dict):
        return service.reballot(body.get("vid", ""), body.get("ots_public_digest"))

    @app.post("/vote")
    async def vote(body: dict):
        return service.vote(body)

    @app.get("/chain")
    async def chain():
        return service.chain_doc()

    @app.get("/block/{height}")
    async def block(height: int):
        return service.block(height)

    @app.get("/commitments")
    async def commitments():
        return service.commitments_doc()

    @app.get("/verify")
    async def verify(vid: str, bid: str):
        return service.verify(vid, bid)

    @app.get("/tally")
    async def tally_endpoint():
        return service.tally_doc()

    @app.get("/audit")
    async def audit_endpoint():
        return service.audit_doc()

    @app.get("/status")
    async def status():
        return service.status()

    return app


# ---------------------------------------------------------------------------
# CLI: `qbvote <subcommand>`. Client subcommands talk to a running service so
# CLI and API validation outcomes are identical by construction.
# ---------------------------------------------------------------------------


def _load_config(path: str) -> ElectionConfig:
    return ElectionConfig.from_dict(json.loads(Path(path).read_text()))


def _session_path(data_dir: str) -> Path:
    return Path(data_dir) / "session.json"


def _load_session(data_dir: str) -> dict:
    p = _session_path(data_dir)
    if not p.exists():
        raise SystemExit("no session; run `qbvote register` first")
    return json.loads(p.read_text())


def _save_session(data_dir: str, session: dict) -> None:
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    _session_path(data_dir).write_text(json.dumps(session))


def _serialize_keypair(kp: ots.OtsKeyPair) -> dict:
    return {
        "secret": "".join(s0.hex() + s1.hex() for s0, s1 in kp.secret),
        "used": kp.used,
    }


def _deserialize_keypair(d: dict) -> ots.OtsKeyPair:
    raw = bytes.fromhex(d["secret"])
    secret = tuple(
        (raw[64 * i : 64 * i + 32], raw[64 * i + 32 : 64 * i + 64]) for i in range(256)
    )
    import hashlib

    public = tuple(
        (hashlib.sha256(s0).digest(), hashlib.sha256(s1).digest()) for s0, s1 in secret
    )
    return ots.OtsKeyPair(secret=secret, public=public, used=d["used"])


def _post(url: str, path: str, body: dict) -> dict:
    import requests

    resp = requests.post(url.rstrip("/") + path, json=body)
    doc = resp.json()
    if resp.status_code >= 400:
        raise SystemExit(f"error {doc.get('code')}: {doc.get('reason')}")
    return doc


def _get(url: str, path: str, **params) -> dict:
    import requests

    resp = requests.get(url.rstrip("/") + path, params=params)
    doc = resp.json()
    if resp.status_code >= 400:
        raise SystemExit(f"error {doc.get('code')}: {doc.get('reason')}")
    return doc


def _cmd_init(args) -> int:
    now = int(time.time() * 1000)
    config = ElectionConfig(
        election_id=args.election_id,
        candidates=tuple(args.candidates.split(",")),
        registration_open=now,
        voting_open=now + args.registration_minutes * 60_000,
        cutoff=now + (args.registration_minutes + args.voting_minutes) * 60_000,
        miners=tuple(f"miner-{i}" for i in range(args.miners)),
        trustee_threshold=args.trustee_threshold,
        trustee_count=args.trustee_count,
        seed=args.seed,
    )
    Path(args.config).write_text(json.dumps(config.to_dict(), indent=1))
    print(f"wrote {args.config}")
    return 0


def _cmd_simulate(args) -> int:
    scenario = scenario_from_dict(json.loads(Path(args.scenario).read_text()))
    net = NetConfig(seed=args.seed)
    transcript = run_scenario(scenario, net)
    if args.out:
        transcript.write(args.out)
    print(f"transcript digest: {transcript.digest()}")
    print(f"counts: {transcript.tally_result.counts}")
    print(f"audit findings: {len(transcript.audit_report.findings)}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    config = _load_config(args.config)
    service = ElectionService(config)
    host, _, port = args.bind.partition(":")
    uvicorn.run(create_app(service), host=host or "127.0.0.1", port=int(port or 8080))
    return 0


def _cmd_register(args) -> int:
    kp = ots.keygen(SimulatedBeamsplitter(0.5))
    doc = _post(
        args.url,
        "/register",
        {
            "credential": args.credential,
            "ots_public_digest": ots.public_key_digest(kp.public).hex(),
        },
    )
    vid = open_package(doc["package"]).hex()
    _save_session(
        args.data_dir,
        {"credential": args.credential, "vid": vid, "bid": None, "keypair": _serialize_keypair(kp)},
    )
    print("registered; VID delivered and stored in session")
    return 0


def _cmd_ballot(args) -> int:
    session = _load_session(args.data_dir)
    doc = _post(args.url, "/ballot", {"vid": session["vid"]})
    session["bid"] = open_package(doc["package"]).hex()
    _save_session(args.data_dir, session)
    print("ballot delivered and stored in session")
    return 0


def _cmd_reballot(args) -> int:
    session = _load_session(args.data_dir)
    kp = ots.keygen(SimulatedBeamsplitter(0.5))
    doc = _post(
        args.url,
        "/reballot",
        {"vid": session["vid"], "ots_public_digest": ots.public_key_digest(kp.public).hex()},
    )
    session["bid"] = open_package(doc["package"]).hex()
    session["keypair"] = _serialize_keypair(kp)
    _save_session(args.data_dir, session)
    print("old ballot revoked; new ballot stored in session")
    return 0


def _cmd_vote(args) -> int:
    session = _load_session(args.data_dir)
    if not session.get("bid"):
        raise SystemExit("no ballot; run `qbvote ballot` first")
    kp = _deserialize_keypair(session["keypair"])
    now = int(time.time() * 1000)
    record = VoteRecord.create(
        Id256(session["vid"]), Id256(session["bid"]), args.choice, now, kp
    )
    session["keypair"] = _serialize_keypair(kp)
    _save_session(args.data_dir, session)
    doc = _post(
        args.url,
        "/vote",
        {
            "pair_digest": record.pair_digest.hex(),
            "choice": record.choice,
            "cast_at": record.cast_at,
            "signature": ots.serialize_signature(record.signature),
            "signer_public": ots.serialize_public(record.signer_public),
        },
    )
    print(f"vote {doc['status']}" + (f" in block {doc['block_height']}" if doc["block_height"] is not None else ""))
    return 0


def _cmd_verify(args) -> int:
    if args.url:
        doc = _get(args.url, "/verify", vid=args.vid, bid=args.bid)
    else:
        chain = chain_from_json(Path(args.chain).read_text())
        commitments = commitments_from_json(Path(args.commitments).read_text())
        config = _load_config(args.config)
        locs = verify_my_vote(
            chain, commitments, Id256(args.vid), Id256(args.bid),
            config.cutoff, len(config.candidates),
        )
        doc = {
            "found": locs[0].found,
            "locations": [
                {"height": l.height, "index": l.index, "counted": l.counted}
                for l in locs
                if l.found
            ],
        }
    print(json.dumps(doc, indent=1))
    return 0 if doc["found"] else 1


def _cmd_tally(args) -> int:
    if args.url:
        doc = _get(args.url, "/tally")
    else:
        config = _load_config(args.config)
        chain = chain_from_json(Path(args.chain).read_text())
        commitments = commitments_from_json(Path(args.commitments).read_text())
        doc = tally(chain, commitments, config.cutoff, len(config.candidates)).to_dict()
    print(json.dumps(doc, indent=1))
    return 0


def _cmd_audit(args) -> int:
    if args.url:
        doc = _get(args.url, "/audit")
    else:
        config = _load_config(args.config)
        chain = chain_from_json(Path(args.chain).read_text())
        commitments = commitments_from_json(Path(args.commitments).read_text())
        from .ledger import validate_chain
        from .audit import AuditReport

        verdict = validate_chain(chain)
        if verdict.valid:
            result = tally(chain, commitments, config.cutoff, len(config.candidates))
            if args.tally:
                announced_counts = {
                    int(k): v
                    for k, v in json.loads(Path(args.tally).read_text())["counts"].items()
                }
                result.counts = announced_counts
            report = audit_election(
                chain, commitments, result, config.cutoff, len(config.candidates)
            )
        else:
            report = AuditReport(
                chain_ok=False,
                first_bad_height=verdict.first_bad_height,
                recount_matches_announced=False,
                commitment_valid=0,
                commitment_invalid=0,
                signature_pass=0,
                signature_fail=0,
                anonymity_scan_clean=True,
                findings=[f"chain invalid at height {verdict.first_bad_height}"],
            )
        doc = report.to_dict()
    print(json.dumps(doc, indent=1))
    return 0 if not doc["findings"] else 2


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qbvote", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write an election config file")
    p.add_argument("--config", default="election.json")
    p.add_argument("--election-id", default="local-election")
    p.add_argument("--candidates", default="alice,bob,carol")
    p.add_argument("--miners", type=int, default=7)
    p.add_argument("--trustee-threshold", type=int, default=3)
    p.add_argument("--trustee-count", type=int, default=5)
    p.add_argument("--registration-minutes", type=int, default=10)
    p.add_argument("--voting-minutes", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("simulate", help="run a scenario file end to end")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="transcript output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--config", default="election.json")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.set_defaults(func=_cmd_serve)

    for name, fn in (
        ("register", _cmd_register),
        ("ballot", _cmd_ballot),
        ("reballot", _cmd_reballot),
        ("vote", _cmd_vote),
    ):
        p = sub.add_parser(name)
        p.add_argument("--url", default="http://127.0.0.1:8080")
        p.add_argument("--data-dir", default=".qbvote")
        if name == "register":
            p.add_argument("--credential", required=True)
        if name == "vote":
            p.add_argument("--choice", type=int, required=True)
        p.set_defaults(func=fn)

    p = sub.add_parser("verify", help="check whether a (vid,bid) vote is on chain")
    p.add_argument("--url")
    p.add_argument("--vid", required=True)
    p.add_argument("--bid", required=True)
    p.add_argument("--chain")
    p.add_argument("--commitments")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("tally", help="tally from the service or from files")
    p.add_argument("--url")
    p.add_argument("--chain")
    p.add_argument("--commitments")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_tally)

    p = sub.add_parser("audit", help="audit from the service or from files")
    p.add_argument("--url")
    p.add_argument("--chain")
    p.add_argument("--commitments")
    p.add_argument("--config")
    p.add_argument("--tally", help="announced tally file to check the recount against")
    p.set_defaults(func=_cmd_audit)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
