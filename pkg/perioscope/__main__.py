import sys

from perioscope.cli import main

sys.exit(main())
