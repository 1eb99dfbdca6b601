"""Rules-complete chess model: positions, legal move generation, FEN I/O.

Squares are indexed 0..63 with a1 = 0, b1 = 1, ..., h8 = 63 (rank-major from
white's point of view).  Positions are immutable values; every operation here
is a pure function, so concurrent use needs no coordination.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional

WHITE = 0
BLACK = 1

# piece kinds; bitboard index = kind + 6 * color
PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = range(6)

PIECE_CHARS = "PNBRQKpnbrqk"
CHAR_TO_PIECE = {c: i for i, c in enumerate(PIECE_CHARS)}

STARTPOS_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

# castling-rights mask bits
CASTLE_WK, CASTLE_WQ, CASTLE_BK, CASTLE_BQ = 1, 2, 4, 8

FULL_BOARD = (1 << 64) - 1

FILE_A = 0x0101010101010101
FILE_H = FILE_A << 7
FILE_MASKS = [FILE_A << f for f in range(8)]
RANK_MASKS = [0xFF << (8 * r) for r in range(8)]

# move kind flags
NORMAL, CAPTURE, CASTLE, EN_PASSANT, PROMOTION = 0, 1, 2, 4, 8

_PROMO_SORT = {QUEEN: 0, ROOK: 1, BISHOP: 2, KNIGHT: 3}
_PROMO_CHARS = {QUEEN: "q", ROOK: "r", BISHOP: "b", KNIGHT: "n"}
_CHAR_PROMO = {v: k for k, v in _PROMO_CHARS.items()}


def square_index(name: str) -> int:
    """Convert algebraic square name ('e4') to a 0..63 index."""
    if len(name) != 2 or name[0] not in "abcdefgh" or name[1] not in "12345678":
        raise ValueError(f"bad square name: {name!r}")
    return (ord(name[1]) - ord("1")) * 8 + (ord(name[0]) - ord("a"))


def square_name(sq: int) -> str:
    return "abcdefgh"[sq & 7] + "12345678"[sq >> 3]


class FenError(ValueError):
    """Raised for malformed or illegal FEN input."""


class IllegalMoveError(ValueError):
    """Raised when a move cannot be played in the given position."""


@dataclass(frozen=True)
class Move:
    """A chess move: from/to squares, optional promotion kind, kind flags."""

    from_sq: int
    to_sq: int
    promotion: Optional[int] = None
    flags: int = NORMAL

    def uci(self) -> str:
        s = square_name(self.from_sq) + square_name(self.to_sq)
        if self.promotion is not None:
            s += _PROMO_CHARS[self.promotion]
        return s

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"Move({self.uci()})"

    @property
    def is_capture(self) -> bool:
        return bool(self.flags & (CAPTURE | EN_PASSANT))


# ---------------------------------------------------------------------------
# attack tables (built once at import)
# ---------------------------------------------------------------------------

def _build_step_table(steps: Iterable[tuple[int, int]]) -> list[int]:
    table = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        bb = 0
        for df, dr in steps:
            nf, nr = f + df, r + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                bb |= 1 << (nr * 8 + nf)
        table.append(bb)
    return table


KNIGHT_ATTACKS = _build_step_table(
    [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)]
)
KING_ATTACKS = _build_step_table(
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
)
# PAWN_ATTACKS[color][sq]: squares a pawn of `color` on `sq` attacks
PAWN_ATTACKS = [
    _build_step_table([(-1, 1), (1, 1)]),
    _build_step_table([(-1, -1), (1, -1)]),
]

# direction rays, positive = increasing square index
_DIR_STEPS = {
    "N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0),
    "NE": (1, 1), "NW": (-1, 1), "SE": (1, -1), "SW": (-1, -1),
}


def _build_ray(df: int, dr: int) -> list[int]:
    table = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        bb = 0
        nf, nr = f + df, r + dr
        while 0 <= nf < 8 and 0 <= nr < 8:
            bb |= 1 << (nr * 8 + nf)
            nf += df
            nr += dr
        table.append(bb)
    return table


RAYS = {name: _build_ray(df, dr) for name, (df, dr) in _DIR_STEPS.items()}
_RAY_N, _RAY_S, _RAY_E, _RAY_W = RAYS["N"], RAYS["S"], RAYS["E"], RAYS["W"]
_RAY_NE, _RAY_NW, _RAY_SE, _RAY_SW = RAYS["NE"], RAYS["NW"], RAYS["SE"], RAYS["SW"]

# BETWEEN[a][b]: squares strictly between a and b when aligned, else 0
BETWEEN = [[0] * 64 for _ in range(64)]
# LINE[a][b]: full line through a and b (incl. both) when aligned, else 0
LINE = [[0] * 64 for _ in range(64)]


def _init_lines() -> None:
    for a in range(64):
        for name, ray in RAYS.items():
            targets = ray[a]
            t = targets
            while t:
                b = (t & -t).bit_length() - 1
                t &= t - 1
                BETWEEN[a][b] = targets & ~RAYS[name][b] & ~(1 << b)
                LINE[a][b] = (ray[a] | RAYS[_OPPOSITE[name]][a] | (1 << a)) & (
                    RAYS[name][b] | RAYS[_OPPOSITE[name]][b] | (1 << b)
                )


_OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E",
             "NE": "SW", "SW": "NE", "NW": "SE", "SE": "NW"}
_init_lines()


def rook_attacks(sq: int, occ: int) -> int:
    att = 0
    ray = _RAY_N[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_N[(blockers & -blockers).bit_length() - 1] if blockers else ray
    ray = _RAY_E[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_E[(blockers & -blockers).bit_length() - 1] if blockers else ray
    ray = _RAY_S[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_S[blockers.bit_length() - 1] if blockers else ray
    ray = _RAY_W[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_W[blockers.bit_length() - 1] if blockers else ray
    return att


def bishop_attacks(sq: int, occ: int) -> int:
    att = 0
    ray = _RAY_NE[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_NE[(blockers & -blockers).bit_length() - 1] if blockers else ray
    ray = _RAY_NW[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_NW[(blockers & -blockers).bit_length() - 1] if blockers else ray
    ray = _RAY_SE[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_SE[blockers.bit_length() - 1] if blockers else ray
    ray = _RAY_SW[sq]
    blockers = ray & occ
    att |= ray ^ _RAY_SW[blockers.bit_length() - 1] if blockers else ray
    return att


def queen_attacks(sq: int, occ: int) -> int:
    return rook_attacks(sq, occ) | bishop_attacks(sq, occ)


# ---------------------------------------------------------------------------
# Zobrist keys (fixed seed: keys must be identical across runs and processes)
# ---------------------------------------------------------------------------

_zrng = random.Random(0x5EED5EED)
ZOBRIST_PIECE = [[_zrng.getrandbits(64) for _ in range(64)] for _ in range(12)]
ZOBRIST_SIDE = _zrng.getrandbits(64)
ZOBRIST_CASTLE = [_zrng.getrandbits(64) for _ in range(16)]
ZOBRIST_EP_FILE = [_zrng.getrandbits(64) for _ in range(8)]
del _zrng


class Position:
    """Immutable full game state. Use parse_fen/apply_move to construct."""

    __slots__ = ("bb", "occ_w", "occ_b", "occ", "side", "castling", "ep",
                 "halfmove", "fullmove", "key")

    def __init__(self, bb: tuple[int, ...], side: int, castling: int,
                 ep: int, halfmove: int, fullmove: int):
        self.bb = bb
        self.side = side
        self.castling = castling
        self.ep = ep  # en-passant target square, or -1
        self.halfmove = halfmove
        self.fullmove = fullmove
        occ_w = bb[0] | bb[1] | bb[2] | bb[3] | bb[4] | bb[5]
        occ_b = bb[6] | bb[7] | bb[8] | bb[9] | bb[10] | bb[11]
        self.occ_w = occ_w
        self.occ_b = occ_b
        self.occ = occ_w | occ_b
        key = ZOBRIST_CASTLE[castling]
        if side == BLACK:
            key ^= ZOBRIST_SIDE
        if ep >= 0:
            key ^= ZOBRIST_EP_FILE[ep & 7]
        for p in range(12):
            pieces = bb[p]
            zp = ZOBRIST_PIECE[p]
            while pieces:
                sq = (pieces & -pieces).bit_length() - 1
                pieces &= pieces - 1
                key ^= zp[sq]
        self.key = key

    def piece_at(self, sq: int) -> Optional[int]:
        mask = 1 << sq
        if not self.occ & mask:
            return None
        for p in range(12):
            if self.bb[p] & mask:
                return p
        return None

    def king_square(self, color: int) -> int:
        return self.bb[KING + 6 * color].bit_length() - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Position):
            return NotImplemented
        return (self.bb == other.bb and self.side == other.side
                and self.castling == other.castling and self.ep == other.ep
                and self.halfmove == other.halfmove
                and self.fullmove == other.fullmove)

    def __hash__(self) -> int:
        return hash((self.key, self.halfmove, self.fullmove))

    def __getstate__(self):
        return (self.bb, self.side, self.castling, self.ep,
                self.halfmove, self.fullmove)

    def __setstate__(self, state):
        self.__init__(*state)

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"Position({to_fen(self)!r})"


@dataclass(frozen=True)
class Outcome:
    """Terminal-state classification of a position."""

    ONGOING = "ongoing"
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    FIFTY_MOVE = "draw-fifty-move"
    INSUFFICIENT = "draw-insufficient-material"
    THREEFOLD = "draw-threefold"

    tag: str
    winner: Optional[int] = None  # set only for checkmate

    @property
    def is_over(self) -> bool:
        return self.tag != Outcome.ONGOING

    @property
    def is_draw(self) -> bool:
        return self.is_over and self.tag != Outcome.CHECKMATE


# ---------------------------------------------------------------------------
# FEN
# ---------------------------------------------------------------------------

def parse_fen(text: str) -> Position:
    """Parse a 6-field FEN record into a validated Position.

    Raises FenError for malformed records or positions violating the basic
    invariants (one king per color, no pawns on back ranks, side not to move
    may not be in check, en-passant square on rank 3/6).
    """
    fields = text.split()
    if len(fields) != 6:
        raise FenError(f"expected 6 FEN fields, got {len(fields)}")
    placement, stm, castling, ep, halfmove, fullmove = fields

    ranks = placement.split("/")
    if len(ranks) != 8:
        raise FenError(f"expected 8 ranks, got {len(ranks)}")
    bb = [0] * 12
    for rank_idx, rank in enumerate(ranks):
        r = 7 - rank_idx
        f = 0
        for ch in rank:
            if ch.isdigit():
                n = int(ch)
                if not 1 <= n <= 8:
                    raise FenError(f"bad empty-square count {ch!r}")
                f += n
            else:
                p = CHAR_TO_PIECE.get(ch)
                if p is None:
                    raise FenError(f"bad piece letter {ch!r}")
                if f >= 8:
                    raise FenError(f"rank {r + 1} overflows 8 files")
                bb[p] |= 1 << (r * 8 + f)
                f += 1
        if f != 8:
            raise FenError(f"rank {r + 1} does not fill 8 files")

    if stm == "w":
        side = WHITE
    elif stm == "b":
        side = BLACK
    else:
        raise FenError(f"bad side to move {stm!r}")

    rights = 0
    if castling != "-":
        for ch in castling:
            bit = {"K": CASTLE_WK, "Q": CASTLE_WQ,
                   "k": CASTLE_BK, "q": CASTLE_BQ}.get(ch)
            if bit is None or rights & bit:
                raise FenError(f"bad castling field {castling!r}")
            rights |= bit

    if ep == "-":
        ep_sq = -1
    else:
        ep_sq = square_index(ep)
        if (ep_sq >> 3) not in (2, 5):
            raise FenError(f"en-passant square {ep!r} not on rank 3 or 6")

    try:
        hm = int(halfmove)
        fm = int(fullmove)
    except ValueError as exc:
        raise FenError(f"bad move counters {halfmove!r}/{fullmove!r}") from exc
    if hm < 0 or fm < 1:
        raise FenError(f"bad move counters {halfmove!r}/{fullmove!r}")

    if bb[KING].bit_count() != 1 or bb[KING + 6].bit_count() != 1:
        raise FenError("each side must have exactly one king")
    if (bb[PAWN] | bb[PAWN + 6]) & (RANK_MASKS[0] | RANK_MASKS[7]):
        raise FenError("pawns on rank 1 or 8")

    pos = Position(tuple(bb), side, rights, ep_sq, hm, fm)
    if is_attacked(pos, pos.king_square(1 - side), side):
        raise FenError("side not to move is in check")
    return pos


def to_fen(position: Position) -> str:
    """Serialize a Position to its canonical 6-field FEN record."""
    rows = []
    for r in range(7, -1, -1):
        row = []
        empty = 0
        for f in range(8):
            p = position.piece_at(r * 8 + f)
            if p is None:
                empty += 1
            else:
                if empty:
                    row.append(str(empty))
                    empty = 0
                row.append(PIECE_CHARS[p])
        if empty:
            row.append(str(empty))
        rows.append("".join(row))
    placement = "/".join(rows)
    stm = "w" if position.side == WHITE else "b"
    rights = "".join(ch for ch, bit in
                     zip("KQkq", (CASTLE_WK, CASTLE_WQ, CASTLE_BK, CASTLE_BQ))
                     if position.castling & bit) or "-"
    ep = square_name(position.ep) if position.ep >= 0 else "-"
    return f"{placement} {stm} {rights} {ep} {position.halfmove} {position.fullmove}"


def startpos() -> Position:
    return parse_fen(STARTPOS_FEN)


# ---------------------------------------------------------------------------
# attack queries
# ---------------------------------------------------------------------------

def is_attacked(position: Position, sq: int, by: int, occ: Optional[int] = None) -> bool:
    """True if `sq` is attacked by any piece of color `by`."""
    bb = position.bb
    base = 6 * by
    if occ is None:
        occ = position.occ
    if KNIGHT_ATTACKS[sq] & bb[KNIGHT + base]:
        return True
    # a `by`-colored pawn attacks sq from the squares a (1-by) pawn on sq attacks
    if PAWN_ATTACKS[1 - by][sq] & bb[PAWN + base]:
        return True
    if KING_ATTACKS[sq] & bb[KING + base]:
        return True
    rq = bb[ROOK + base] | bb[QUEEN + base]
    if rq and rook_attacks(sq, occ) & rq:
        return True
    bq = bb[BISHOP + base] | bb[QUEEN + base]
    if bq and bishop_attacks(sq, occ) & bq:
        return True
    return False


def in_check(position: Position) -> bool:
    return is_attacked(position, position.king_square(position.side),
                       1 - position.side)


def _checkers(position: Position, king_sq: int, by: int) -> int:
    bb = position.bb
    base = 6 * by
    occ = position.occ
    att = KNIGHT_ATTACKS[king_sq] & bb[KNIGHT + base]
    att |= PAWN_ATTACKS[1 - by][king_sq] & bb[PAWN + base]
    rq = bb[ROOK + base] | bb[QUEEN + base]
    if rq:
        att |= rook_attacks(king_sq, occ) & rq
    bq = bb[BISHOP + base] | bb[QUEEN + base]
    if bq:
        att |= bishop_attacks(king_sq, occ) & bq
    return att


# ---------------------------------------------------------------------------
# legal move generation
# ---------------------------------------------------------------------------

def _pawn_moves(position: Position, us: int, target_mask: int, pin_line,
                out: list[Move], first_only: bool) -> Optional[Move]:
    bb = position.bb
    occ = position.occ
    them_occ = position.occ_b if us == WHITE else position.occ_w
    pawns = bb[PAWN + 6 * us]
    ep = position.ep
    if us == WHITE:
        push, dbl_rank, promo_rank = 8, 1, 6
    else:
        push, dbl_rank, promo_rank = -8, 6, 1
    patt = PAWN_ATTACKS[us]
    while pawns:
        frm = (pawns & -pawns).bit_length() - 1
        pawns &= pawns - 1
        allowed = pin_line.get(frm, FULL_BOARD) if pin_line else FULL_BOARD
        rank = frm >> 3
        targets = 0
        one = frm + push
        if not occ >> one & 1:
            targets |= 1 << one
            if rank == dbl_rank:
                two = one + push
                if not occ >> two & 1:
                    targets |= 1 << two
        targets |= patt[frm] & them_occ
        targets &= target_mask & allowed
        if ep >= 0 and patt[frm] >> ep & 1 and allowed >> ep & 1:
            # en-passant: validate by simulating the capture (handles both
            # pins and the horizontal discovered-check case)
            cap_sq = ep - push
            if target_mask >> ep & 1 or target_mask >> cap_sq & 1:
                new_occ = (occ ^ (1 << frm) ^ (1 << cap_sq)) | (1 << ep)
                ksq = position.king_square(us)
                them = 1 - us
                base = 6 * them
                rq = bb[ROOK + base] | bb[QUEEN + base]
                bq = bb[BISHOP + base] | bb[QUEEN + base]
                safe = not (rq and rook_attacks(ksq, new_occ) & rq) and \
                    not (bq and bishop_attacks(ksq, new_occ) & bq)
                if safe:
                    mv = Move(frm, ep, None, EN_PASSANT | CAPTURE)
                    if first_only:
                        return mv
                    out.append(mv)
        while targets:
            to = (targets & -targets).bit_length() - 1
            targets &= targets - 1
            flags = CAPTURE if them_occ >> to & 1 else NORMAL
            if rank == promo_rank:
                for promo in (QUEEN, ROOK, BISHOP, KNIGHT):
                    mv = Move(frm, to, promo, flags | PROMOTION)
                    if first_only:
                        return mv
                    out.append(mv)
            else:
                mv = Move(frm, to, None, flags)
                if first_only:
                    return mv
                out.append(mv)
    return None


def _generate(position: Position, first_only: bool) -> "list[Move] | Optional[Move]":
    """Generate strictly legal moves; with first_only, return one move or None."""
    us = position.side
    them = 1 - us
    bb = position.bb
    base = 6 * us
    tbase = 6 * them
    occ = position.occ
    own_occ = position.occ_w if us == WHITE else position.occ_b
    them_occ = position.occ_b if us == WHITE else position.occ_w
    ksq = position.king_square(us)

    out: list[Move] = []

    # --- king moves (checked square by square, king removed from occupancy)
    occ_no_king = occ ^ (1 << ksq)
    kt = KING_ATTACKS[ksq] & ~own_occ
    while kt:
        to = (kt & -kt).bit_length() - 1
        kt &= kt - 1
        if not is_attacked(position, to, them, occ_no_king):
            mv = Move(ksq, to, None, CAPTURE if them_occ >> to & 1 else NORMAL)
            if first_only:
                return mv
            out.append(mv)

    checkers = _checkers(position, ksq, them)
    n_checkers = checkers.bit_count()
    if n_checkers >= 2:
        if first_only:
            return None
        out.sort(key=_move_sort_key)
        return out

    if n_checkers == 1:
        csq = checkers.bit_length() - 1
        target_mask = checkers | BETWEEN[ksq][csq]
    else:
        target_mask = ~own_occ & FULL_BOARD

    # --- pins: own pieces on a line between our king and an enemy slider
    pin_line: dict[int, int] = {}
    rq = bb[ROOK + tbase] | bb[QUEEN + tbase]
    bq = bb[BISHOP + tbase] | bb[QUEEN + tbase]
    snipers = 0
    if rq:
        snipers |= rook_attacks(ksq, them_occ) & rq
    if bq:
        snipers |= bishop_attacks(ksq, them_occ) & bq
    while snipers:
        ssq = (snipers & -snipers).bit_length() - 1
        snipers &= snipers - 1
        between = BETWEEN[ksq][ssq] & occ
        if between.bit_count() == 1 and between & own_occ:
            pinned_sq = between.bit_length() - 1
            pin_line[pinned_sq] = LINE[ksq][ssq]

    # --- pawns
    res = _pawn_moves(position, us, target_mask, pin_line, out, first_only)
    if first_only and res is not None:
        return res

    # --- knights (a pinned knight can never move)
    knights = bb[KNIGHT + base]
    while knights:
        frm = (knights & -knights).bit_length() - 1
        knights &= knights - 1
        if frm in pin_line:
            continue
        targets = KNIGHT_ATTACKS[frm] & target_mask
        while targets:
            to = (targets & -targets).bit_length() - 1
            targets &= targets - 1
            mv = Move(frm, to, None, CAPTURE if them_occ >> to & 1 else NORMAL)
            if first_only:
                return mv
            out.append(mv)

    # --- sliders
    for kind, attack_fn in ((BISHOP, bishop_attacks), (ROOK, rook_attacks),
                            (QUEEN, queen_attacks)):
        pieces = bb[kind + base]
        while pieces:
            frm = (pieces & -pieces).bit_length() - 1
            pieces &= pieces - 1
            targets = attack_fn(frm, occ) & target_mask
            if frm in pin_line:
                targets &= pin_line[frm]
            while targets:
                to = (targets & -targets).bit_length() - 1
                targets &= targets - 1
                mv = Move(frm, to, None,
                          CAPTURE if them_occ >> to & 1 else NORMAL)
                if first_only:
                    return mv
                out.append(mv)

    # --- castling (not while in check; path squares empty and unattacked)
    if n_checkers == 0:
        if us == WHITE:
            if (position.castling & CASTLE_WK and not occ & 0x60
                    and not is_attacked(position, 5, them)
                    and not is_attacked(position, 6, them)):
                mv = Move(4, 6, None, CASTLE)
                if first_only:
                    return mv
                out.append(mv)
            if (position.castling & CASTLE_WQ and not occ & 0x0E
                    and not is_attacked(position, 3, them)
                    and not is_attacked(position, 2, them)):
                mv = Move(4, 2, None, CASTLE)
                if first_only:
                    return mv
                out.append(mv)
        else:
            if (position.castling & CASTLE_BK and not occ & (0x60 << 56)
                    and not is_attacked(position, 61, them)
                    and not is_attacked(position, 62, them)):
                mv = Move(60, 62, None, CASTLE)
                if first_only:
                    return mv
                out.append(mv)
            if (position.castling & CASTLE_BQ and not occ & (0x0E << 56)
                    and not is_attacked(position, 59, them)
                    and not is_attacked(position, 58, them)):
                mv = Move(60, 58, None, CASTLE)
                if first_only:
                    return mv
                out.append(mv)

    if first_only:
        return None
    out.sort(key=_move_sort_key)
    return out


def _move_sort_key(m: Move) -> tuple[int, int, int]:
    return (m.from_sq, m.to_sq,
            _PROMO_SORT[m.promotion] if m.promotion is not None else 0)


def legal_moves(position: Position) -> list[Move]:
    """All legal moves, ordered by (from, to, promotion Q/R/B/N)."""
    return _generate(position, False)


def has_legal_move(position: Position) -> bool:
    """Cheap emptiness test for legal_moves (early exit on the first move)."""
    return _generate(position, True) is not None


# ---------------------------------------------------------------------------
# applying moves
# ---------------------------------------------------------------------------

# castling-rights bits cleared when a piece moves from / to a square
_CASTLE_CLEAR = [0xF] * 64
_CASTLE_CLEAR[0] = 0xF ^ CASTLE_WQ
_CASTLE_CLEAR[7] = 0xF ^ CASTLE_WK
_CASTLE_CLEAR[4] = 0xF ^ (CASTLE_WK | CASTLE_WQ)
_CASTLE_CLEAR[56] = 0xF ^ CASTLE_BQ
_CASTLE_CLEAR[63] = 0xF ^ CASTLE_BK
_CASTLE_CLEAR[60] = 0xF ^ (CASTLE_BK | CASTLE_BQ)


def apply_move(position: Position, move: Move) -> Position:
    """Play `move` (which must come from legal_moves) and return the new position."""
    us = position.side
    base = 6 * us
    frm, to = move.from_sq, move.to_sq
    frm_bb, to_bb = 1 << frm, 1 << to

    bb = list(position.bb)
    moving = None
    for kind in range(6):
        if bb[kind + base] & frm_bb:
            moving = kind
            break
    if moving is None:
        raise IllegalMoveError(
            f"no {('white', 'black')[us]} piece on {square_name(frm)}")
    own_occ = position.occ_w if us == WHITE else position.occ_b
    if own_occ & to_bb:
        raise IllegalMoveError(f"destination {square_name(to)} occupied by own piece")

    tbase = 6 * (1 - us)
    captured = None
    if position.occ & to_bb:
        for kind in range(6):
            if bb[kind + tbase] & to_bb:
                captured = kind
                bb[kind + tbase] ^= to_bb
                break

    bb[moving + base] ^= frm_bb
    if move.flags & EN_PASSANT:
        cap_sq = to - 8 if us == WHITE else to + 8
        bb[PAWN + tbase] ^= 1 << cap_sq
        captured = PAWN
    if move.promotion is not None:
        bb[move.promotion + base] |= to_bb
    else:
        bb[moving + base] |= to_bb

    if move.flags & CASTLE:
        if to == 6:
            bb[ROOK + base] ^= (1 << 7) | (1 << 5)
        elif to == 2:
            bb[ROOK + base] ^= 1 | (1 << 3)
        elif to == 62:
            bb[ROOK + base] ^= (1 << 63) | (1 << 61)
        else:
            bb[ROOK + base] ^= (1 << 56) | (1 << 59)

    castling = position.castling & _CASTLE_CLEAR[frm] & _CASTLE_CLEAR[to]

    ep = -1
    if moving == PAWN and abs(to - frm) == 16:
        ep = (frm + to) >> 1

    halfmove = 0 if (moving == PAWN or captured is not None) else position.halfmove + 1
    fullmove = position.fullmove + (1 if us == BLACK else 0)
    return Position(tuple(bb), 1 - us, castling, ep, halfmove, fullmove)


def make_null_move(position: Position) -> Position:
    """Pass the move to the opponent (search heuristic; not a legal chess move)."""
    return Position(position.bb, 1 - position.side, position.castling, -1,
                    position.halfmove + 1, position.fullmove)


def find_move(position: Position, uci: str) -> Move:
    """Resolve a UCI move string (e2e4, e7e8q) to the legal Move, or raise."""
    if len(uci) not in (4, 5):
        raise IllegalMoveError(f"bad UCI move {uci!r}")
    frm = square_index(uci[0:2])
    to = square_index(uci[2:4])
    promo = _CHAR_PROMO.get(uci[4]) if len(uci) == 5 else None
    if len(uci) == 5 and promo is None:
        raise IllegalMoveError(f"bad promotion letter in {uci!r}")
    for m in legal_moves(position):
        if m.from_sq == frm and m.to_sq == to and m.promotion == promo:
            return m
    raise IllegalMoveError(f"move {uci!r} is not legal here")


# ---------------------------------------------------------------------------
# terminal-state detection
# ---------------------------------------------------------------------------

_LIGHT_SQUARES = 0x55AA55AA55AA55AA


def insufficient_material(position: Position) -> bool:
    """K vs K, K+minor vs K, or kings with same-colored bishops only."""
    bb = position.bb
    if (bb[PAWN] | bb[PAWN + 6] | bb[ROOK] | bb[ROOK + 6]
            | bb[QUEEN] | bb[QUEEN + 6]):
        return False
    minors = (bb[KNIGHT] | bb[KNIGHT + 6] | bb[BISHOP] | bb[BISHOP + 6])
    n = minors.bit_count()
    if n <= 1:
        return True
    if bb[KNIGHT] | bb[KNIGHT + 6]:
        return False
    bishops = bb[BISHOP] | bb[BISHOP + 6]
    return not (bishops & _LIGHT_SQUARES) or not (bishops & ~_LIGHT_SQUARES)


def outcome(position: Position, history: "tuple[Position, ...] | list[Position]" = ()) -> Outcome:
    """Classify the position; `history` holds the game's earlier positions.

    Threefold repetition compares position keys (piece placement, side to
    move, castling rights, en-passant file) of `position` against `history`;
    the current position counts as one occurrence on top of the matches.
    """
    if not has_legal_move(position):
        if in_check(position):
            return Outcome(Outcome.CHECKMATE, winner=1 - position.side)
        return Outcome(Outcome.STALEMATE)
    if position.halfmove >= 100:
        return Outcome(Outcome.FIFTY_MOVE)
    if insufficient_material(position):
        return Outcome(Outcome.INSUFFICIENT)
    if history:
        key = position.key
        seen = 1
        for past in history:
            if past.key == key:
                seen += 1
                if seen >= 3:
                    return Outcome(Outcome.THREEFOLD)
    return Outcome(Outcome.ONGOING)


# ---------------------------------------------------------------------------
# perft
# ---------------------------------------------------------------------------

def perft(position: Position, depth: int, _memo: Optional[dict] = None) -> int:
    """Count leaf nodes of the legal-move tree at exactly `depth`."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        return 1
    if _memo is None:
        _memo = {}
    return _perft(position, depth, _memo)


def _perft(position: Position, depth: int, memo: dict) -> int:
    moves = legal_moves(position)
    if depth == 1:
        return len(moves)
    k = (position.key, depth)
    cached = memo.get(k)
    if cached is not None:
        return cached
    total = 0
    for m in moves:
        total += _perft(apply_move(position, m), depth - 1, memo)
    memo[k] = total
    return total


def mirror_position(position: Position) -> Position:
    """Color-flip mirror: flip ranks, swap piece colors, castling rights,
    en-passant square and the side to move (the legality-preserving transform)."""

    def flip(bbd: int) -> int:
        out = 0
        for r in range(8):
            out |= ((bbd >> (8 * r)) & 0xFF) << (8 * (7 - r))
        return out

    bb = position.bb
    new_bb = tuple(flip(bb[p + 6]) for p in range(6)) + \
        tuple(flip(bb[p]) for p in range(6))
    castling = ((position.castling & 0x3) << 2) | ((position.castling >> 2) & 0x3)
    ep = -1 if position.ep < 0 else (position.ep ^ 56)
    return Position(new_bb, 1 - position.side, castling, ep,
                    position.halfmove, position.fullmove)
