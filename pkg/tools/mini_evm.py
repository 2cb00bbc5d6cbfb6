"""Just enough of the EVM to run solc-generated constructors.

Used only to freeze storage goldens: the creation code runs with no calldata
and no value, and every SSTORE is recorded. Hashing goes through pycryptodome,
so nothing here shares code with statemigrate. Calls, creates and the other
environment-heavy opcodes are not implemented and raise if reached.
"""

from Crypto.Hash import keccak

M256 = (1 << 256) - 1
SIGN = 1 << 255


def _keccak(data: bytes) -> int:
    h = keccak.new(digest_bits=256)
    h.update(data)
    return int.from_bytes(h.digest(), "big")


def _signed(x):
    return x - (1 << 256) if x & SIGN else x


class EvmError(Exception):
    pass


class Revert(EvmError):
    pass


def _jumpdests(code: bytes):
    dests, i = set(), 0
    while i < len(code):
        op = code[i]
        if op == 0x5B:
            dests.add(i)
        i += 1 + (op - 0x5F if 0x60 <= op <= 0x7F else 0)
    return dests


class Memory:
    def __init__(self):
        self.data = bytearray()

    def _grow(self, end):
        if end > len(self.data):
            self.data.extend(bytes((end + 31) // 32 * 32 - len(self.data)))

    def read(self, off, n):
        if n == 0:
            return b""
        self._grow(off + n)
        return bytes(self.data[off:off + n])

    def write(self, off, blob):
        if blob:
            self._grow(off + len(blob))
            self.data[off:off + len(blob)] = blob


def run_constructor(code: bytes, address: int = 0xC0FFEE, caller: int = 0xCA11E4, step_limit: int = 50_000_000):
    """Execute creation code; return (storage dict, runtime code)."""
    storage = {}
    stack = []
    mem = Memory()
    dests = _jumpdests(code)
    pc = 0
    steps = 0

    def pop():
        if not stack:
            raise EvmError(f"stack underflow at pc {pc}")
        return stack.pop()

    def push(v):
        if len(stack) >= 1024:
            raise EvmError("stack overflow")
        stack.append(v & M256)

    while True:
        steps += 1
        if steps > step_limit:
            raise EvmError("step limit reached")
        if pc >= len(code):
            return storage, b""
        op = code[pc]
        pc += 1
        if op == 0x00:  # STOP
            return storage, b""
        elif op == 0x01:
            push(pop() + pop())
        elif op == 0x02:
            push(pop() * pop())
        elif op == 0x03:
            a, b = pop(), pop()
            push(a - b)
        elif op == 0x04:
            a, b = pop(), pop()
            push(a // b if b else 0)
        elif op == 0x05:
            a, b = _signed(pop()), _signed(pop())
            push(0 if b == 0 else (abs(a) // abs(b)) * (-1 if (a < 0) != (b < 0) else 1))
        elif op == 0x06:
            a, b = pop(), pop()
            push(a % b if b else 0)
        elif op == 0x07:
            a, b = _signed(pop()), _signed(pop())
            push(0 if b == 0 else (abs(a) % abs(b)) * (-1 if a < 0 else 1))
        elif op == 0x08:
            a, b, n = pop(), pop(), pop()
            push((a + b) % n if n else 0)
        elif op == 0x09:
            a, b, n = pop(), pop(), pop()
            push((a * b) % n if n else 0)
        elif op == 0x0A:
            a, b = pop(), pop()
            push(pow(a, b, 1 << 256))
        elif op == 0x0B:
            b, x = pop(), pop()
            if b < 31:
                bit = 8 * b + 7
                mask = (1 << bit) - 1
                x = x | (M256 ^ mask) if x >> bit & 1 else x & mask
            push(x)
        elif op == 0x10:
            push(int(pop() < pop()))
        elif op == 0x11:
            push(int(pop() > pop()))
        elif op == 0x12:
            push(int(_signed(pop()) < _signed(pop())))
        elif op == 0x13:
            push(int(_signed(pop()) > _signed(pop())))
        elif op == 0x14:
            push(int(pop() == pop()))
        elif op == 0x15:
            push(int(pop() == 0))
        elif op == 0x16:
            push(pop() & pop())
        elif op == 0x17:
            push(pop() | pop())
        elif op == 0x18:
            push(pop() ^ pop())
        elif op == 0x19:
            push(M256 ^ pop())
        elif op == 0x1A:
            i, x = pop(), pop()
            push(x >> (8 * (31 - i)) & 0xFF if i < 32 else 0)
        elif op == 0x1B:
            s, x = pop(), pop()
            push(x << s if s < 256 else 0)
        elif op == 0x1C:
            s, x = pop(), pop()
            push(x >> s if s < 256 else 0)
        elif op == 0x1D:
            s, x = pop(), _signed(pop())
            push(x >> s if s < 256 else (-1 if x < 0 else 0))
        elif op == 0x20:
            off, n = pop(), pop()
            push(_keccak(mem.read(off, n)))
        elif op == 0x30:
            push(address)
        elif op in (0x32, 0x33):  # ORIGIN, CALLER
            push(caller)
        elif op == 0x34:  # CALLVALUE
            push(0)
        elif op == 0x35:  # CALLDATALOAD
            pop()
            push(0)
        elif op == 0x36:  # CALLDATASIZE
            push(0)
        elif op == 0x37:  # CALLDATACOPY
            m, _, n = pop(), pop(), pop()
            mem.write(m, bytes(n))
        elif op == 0x38:
            push(len(code))
        elif op == 0x39:
            m, c, n = pop(), pop(), pop()
            chunk = code[c:c + n] if c < len(code) else b""
            mem.write(m, chunk + bytes(n - len(chunk)))
        elif op == 0x3D:  # RETURNDATASIZE
            push(0)
        elif op == 0x46:  # CHAINID
            push(1)
        elif op == 0x50:
            pop()
        elif op == 0x51:
            push(int.from_bytes(mem.read(pop(), 32), "big"))
        elif op == 0x52:
            off, v = pop(), pop()
            mem.write(off, v.to_bytes(32, "big"))
        elif op == 0x53:
            off, v = pop(), pop()
            mem.write(off, bytes([v & 0xFF]))
        elif op == 0x54:
            push(storage.get(pop(), 0))
        elif op == 0x55:
            k, v = pop(), pop()
            if v:
                storage[k] = v
            else:
                storage.pop(k, None)
        elif op in (0x56, 0x57):
            dest = pop()
            if op == 0x57 and not pop():
                continue
            if dest not in dests:
                raise EvmError(f"bad jump to {dest}")
            pc = dest
        elif op == 0x58:
            push(pc - 1)
        elif op == 0x59:
            push(len(mem.data))
        elif op == 0x5A:  # GAS
            push(10 ** 12)
        elif op == 0x5B:
            pass
        elif 0x5F <= op <= 0x7F:
            n = op - 0x5F
            push(int.from_bytes(code[pc:pc + n].ljust(n, b"\0"), "big") if n else 0)
            pc += n
        elif 0x80 <= op <= 0x8F:
            i = op - 0x7F
            if len(stack) < i:
                raise EvmError("stack underflow on DUP")
            push(stack[-i])
        elif 0x90 <= op <= 0x9F:
            i = op - 0x8E
            if len(stack) < i:
                raise EvmError("stack underflow on SWAP")
            stack[-1], stack[-i] = stack[-i], stack[-1]
        elif 0xA0 <= op <= 0xA4:  # LOGn: consume and discard
            pop(), pop()
            for _ in range(op - 0xA0):
                pop()
        elif op == 0xF3:
            off, n = pop(), pop()
            return storage, mem.read(off, n)
        elif op == 0xFD:
            off, n = pop(), pop()
            raise Revert(mem.read(off, n).hex())
        else:
            raise EvmError(f"opcode 0x{op:02x} not implemented (pc {pc - 1})")
