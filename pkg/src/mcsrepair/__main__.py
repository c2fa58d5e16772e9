from .surface.cli import main

raise SystemExit(main())
