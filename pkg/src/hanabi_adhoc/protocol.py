"""Wire protocol for external (opaque) agents.

Messages are newline-delimited JSON objects over a byte stream, either a
child process's stdin/stdout (``cmd:<command line>``) or a TCP socket
(``tcp:<host>:<port>``).  The client opens with a handshake

    {"protocol": 1, "num_players": P, "hand_size": H, "action_space": A}

and expects ``{"protocol": 1}`` back.  Every turn it then sends
``{"obs": <encoded observation>}`` and expects ``{"action": <index>}``.
Anything else, a late reply included, is a protocol violation.

Run ``python -m hanabi_adhoc.protocol <agent>`` to serve a builtin agent
over stdin/stdout, which is handy for testing.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import select
import shlex
import socket
import subprocess
import sys
import time
from dataclasses import dataclass, field

from .cards import COLORS, NUM_IDENTITIES, Card, CardKnowledge
from .engine import Move, Observation, action_index, action_space_size, move_from_index
from .errors import AgentConfigError, EncodingError, ProtocolViolation
from .rng import SplitMix64

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 10.0


# -- canonical observation encoding ---------------------------------------------


def _encode_knowledge(k: CardKnowledge) -> list[int]:
    return [k.color_possible, k.rank_possible, int(k.color_hinted), int(k.rank_hinted)]


def _decode_knowledge(item) -> CardKnowledge:
    cp, rp, ch, rh = (int(x) for x in item)
    return CardKnowledge(cp, rp, bool(ch), bool(rh))


def encode_observation(obs: Observation) -> dict:
    """JSON-ready canonical form of ``obs``.

    The discard pile is sent as a 25-entry count vector indexed by card
    identity, so the encoding does not depend on discard order.
    """
    discards = [0] * NUM_IDENTITIES
    for card in obs.discard_pile:
        discards[card.index] += 1
    return {
        "viewer": obs.viewer,
        "num_players": obs.num_players,
        "hand_size": obs.hand_size,
        "own_knowledge": [_encode_knowledge(k) for k in obs.own_hand_knowledge],
        "other_hands": [
            {
                "offset": offset,
                "cards": [str(c) for c in hand],
                "knowledge": [_encode_knowledge(k) for k in obs.knowledge_of(offset)],
            }
            for offset, hand in enumerate(obs.other_hands, 1)
        ],
        "fireworks": list(obs.fireworks),
        "info_tokens": obs.info_tokens,
        "life_tokens": obs.life_tokens,
        "discards": discards,
        "deck_size": obs.deck_size,
        "current_player": obs.current_player,
        "turns_remaining_after_empty": obs.turns_remaining_after_empty,
        "legal_actions": [action_index(m, obs.num_players, obs.hand_size) for m in obs.legal_moves],
    }


def decode_observation(data: dict) -> Observation:
    """Inverse of :func:`encode_observation` (discards come back sorted by identity)."""
    try:
        n = int(data["num_players"])
        size = int(data["hand_size"])
        hands = sorted(data["other_hands"], key=lambda h: int(h["offset"]))
        discard_pile = []
        for i, count in enumerate(data["discards"]):
            discard_pile.extend([Card.from_index(i)] * int(count))
        if len(data["discards"]) != NUM_IDENTITIES or len(data["fireworks"]) != len(COLORS):
            raise ValueError("wrong vector length")
        remaining = data["turns_remaining_after_empty"]
        return Observation(
            viewer=int(data["viewer"]),
            num_players=n,
            hand_size=size,
            own_hand_knowledge=tuple(_decode_knowledge(k) for k in data["own_knowledge"]),
            other_hands=tuple(tuple(Card.parse(c) for c in h["cards"]) for h in hands),
            other_knowledge=tuple(tuple(_decode_knowledge(k) for k in h["knowledge"]) for h in hands),
            fireworks=tuple(int(x) for x in data["fireworks"]),
            info_tokens=int(data["info_tokens"]),
            life_tokens=int(data["life_tokens"]),
            discard_pile=tuple(discard_pile),
            deck_size=int(data["deck_size"]),
            current_player=int(data["current_player"]),
            turns_remaining_after_empty=None if remaining is None else int(remaining),
            legal_moves=tuple(move_from_index(int(a), n, size) for a in data["legal_actions"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise EncodingError(f"cannot decode observation: {exc}") from None


def canonical_json(obs: Observation) -> str:
    return json.dumps(encode_observation(obs), sort_keys=True, separators=(",", ":"))


def observation_digest(obs: Observation) -> bytes:
    """SHA-256 of the canonical encoding; equal views give equal digests."""
    return hashlib.sha256(canonical_json(obs).encode()).digest()


def observation_rng(obs: Observation, salt: int = 0) -> SplitMix64:
    """A rng determined by the observation alone."""
    seed = int.from_bytes(observation_digest(obs)[:8], "big")
    return SplitMix64(seed ^ salt)


# -- transport ----------------------------------------------------------------------


class _Channel:
    """Line-oriented JSON over a pair of raw file descriptors."""

    def __init__(self, read_fd: int, write) -> None:
        self._fd = read_fd
        self._write = write
        self._buf = b""

    def send(self, message: dict) -> None:
        data = (json.dumps(message, separators=(",", ":")) + "\n").encode()
        try:
            self._write(data)
        except OSError as exc:
            raise ProtocolViolation(f"cannot send to agent: {exc}") from None

    def recv(self, timeout: float) -> dict:
        deadline = time.monotonic() + timeout
        while b"\n" not in self._buf:
            left = deadline - time.monotonic()
            if left <= 0:
                raise ProtocolViolation(f"no reply within {timeout:g}s")
            ready, _, _ = select.select([self._fd], [], [], left)
            if not ready:
                continue
            chunk = os.read(self._fd, 65536)
            if not chunk:
                raise ProtocolViolation("agent closed the connection")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        try:
            message = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise ProtocolViolation(f"undecodable reply: {line[:80]!r}") from None
        if not isinstance(message, dict):
            raise ProtocolViolation(f"reply is not an object: {line[:80]!r}")
        return message


def _open_channel(endpoint: str):
    """(channel, closer) for an endpoint string."""
    scheme, sep, rest = endpoint.partition(":")
    if not sep or not rest:
        raise AgentConfigError(f"bad endpoint {endpoint!r}; expected cmd:... or tcp:host:port")
    if scheme == "cmd":
        try:
            proc = subprocess.Popen(
                shlex.split(rest), stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
            )
        except OSError as exc:
            raise AgentConfigError(f"cannot start agent {rest!r}: {exc}") from None

        def write(data: bytes) -> None:
            proc.stdin.write(data)
            proc.stdin.flush()

        def close() -> None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
            proc.stdout.close()

        return _Channel(proc.stdout.fileno(), write), close
    if scheme == "tcp":
        host, _, port = rest.rpartition(":")
        try:
            sock = socket.create_connection((host or "localhost", int(port)), timeout=DEFAULT_TIMEOUT)
        except (OSError, ValueError) as exc:
            raise AgentConfigError(f"cannot reach agent at {endpoint!r}: {exc}") from None
        sock.settimeout(None)
        return _Channel(sock.fileno(), sock.sendall), sock.close
    raise AgentConfigError(f"unknown endpoint scheme {scheme!r}")


@dataclass
class ExternalAgent:
    """Client side of the protocol; one request in flight at a time."""

    id: str
    endpoint: str
    timeout: float = DEFAULT_TIMEOUT
    kind = "external"
    protocol: int = PROTOCOL_VERSION
    _channel: _Channel | None = field(default=None, repr=False)
    _closer: object = field(default=None, repr=False)
    _shape: tuple[int, int] | None = field(default=None, repr=False)

    def _ensure(self, num_players: int, hand_size: int) -> _Channel:
        if self._channel is None:
            self._channel, self._closer = _open_channel(self.endpoint)
        if self._shape != (num_players, hand_size):
            self._channel.send({
                "protocol": PROTOCOL_VERSION,
                "num_players": num_players,
                "hand_size": hand_size,
                "action_space": action_space_size(num_players, hand_size),
            })
            reply = self._channel.recv(self.timeout)
            if reply.get("protocol") != PROTOCOL_VERSION:
                raise ProtocolViolation(f"agent {self.id!r} rejected the handshake: {reply!r}")
            self._shape = (num_players, hand_size)
        return self._channel

    def decide(self, obs: Observation, rng: SplitMix64 | None = None) -> Move:
        channel = self._ensure(obs.num_players, obs.hand_size)
        channel.send({"obs": encode_observation(obs)})
        reply = channel.recv(self.timeout)
        action = reply.get("action")
        if not isinstance(action, int) or isinstance(action, bool):
            raise ProtocolViolation(f"agent {self.id!r} sent no integer action: {reply!r}")
        try:
            move = move_from_index(action, obs.num_players, obs.hand_size)
        except EncodingError:
            raise ProtocolViolation(f"agent {self.id!r} sent out-of-range action {action}") from None
        if move not in obs.legal_moves:
            raise ProtocolViolation(f"agent {self.id!r} chose illegal move {move}")
        return move

    def clone(self) -> ExternalAgent:
        """A fresh connection to the same endpoint (a separate player instance)."""
        return ExternalAgent(self.id, self.endpoint, self.timeout)

    def close(self) -> None:
        if self._closer is not None:
            self._closer()
        self._channel = self._closer = self._shape = None

    def __enter__(self) -> ExternalAgent:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def connect_external(name: str, endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> ExternalAgent:
    """Connect to an external agent; fails fast if the endpoint cannot be opened."""
    if timeout <= 0:
        raise AgentConfigError(f"timeout must be positive, got {timeout}")
    agent = ExternalAgent(name, endpoint, float(timeout))
    agent._channel, agent._closer = _open_channel(endpoint)
    return agent


# -- server side ----------------------------------------------------------------------


def serve_agent(agent, infile=None, outfile=None) -> int:
    """Answer protocol requests with ``agent`` until end of input.

    Random rules draw from a rng derived from each observation, so the
    served agent is a deterministic function of what it is shown.
    Returns the number of turns answered.
    """
    infile = infile or sys.stdin
    outfile = outfile or sys.stdout
    turns = 0
    for line in infile:
        if not line.strip():
            continue
        message = json.loads(line)
        if "obs" in message:
            obs = decode_observation(message["obs"])
            move = agent.decide(obs, observation_rng(obs))
            reply = {"action": action_index(move, obs.num_players, obs.hand_size)}
            turns += 1
        else:
            reply = {"protocol": PROTOCOL_VERSION}
        outfile.write(json.dumps(reply) + "\n")
        outfile.flush()
    return turns


def main(argv=None) -> int:
    from .agents import load_agents

    parser = argparse.ArgumentParser(description="Serve an agent over the NDJSON protocol on stdio.")
    parser.add_argument("agent", help="builtin agent name")
    args = parser.parse_args(argv)
    (agent,) = load_agents([args.agent])
    serve_agent(agent)
    return 0


if __name__ == "__main__":
    sys.exit(main())
