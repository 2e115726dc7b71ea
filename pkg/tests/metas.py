"""META sources used by several tests."""
from metaguard.rasp.traps import TRAP_NAMES

PROCEED_ALWAYS = """var META = {
  PROCEED: true,
  HALT: false,
%s
};
""" % ",\n".join(f"  {t}: function () {{ return this.PROCEED; }}" for t in TRAP_NAMES)

# one counter per trap; every trap proceeds
COUNTING = """var META = {
%s,
%s
};
""" % (",\n".join(f"  c_{t}: 0" for t in TRAP_NAMES),
       ",\n".join(f"  {t}: function () {{ this.c_{t} = this.c_{t} + 1; return true; }}" for t in TRAP_NAMES))

# stateless: the verdict depends on the arguments only
STATELESS = """var META = {
  apply: function (fn, args, recv) { return fn !== fetch || args.length < 2; },
  get: function (o, k) { return k !== "secret"; }
};
"""
