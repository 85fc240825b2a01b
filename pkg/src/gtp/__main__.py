import sys

from gtp.cli import main

sys.exit(main())
