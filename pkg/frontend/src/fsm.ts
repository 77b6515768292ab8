// View-model for the state tabs and controller toggle: optimistic selection
// with revert-and-reason on rejection, kept DOM-free so it is testable
// against a live runner.

import { ApiError, ConsoleApi } from "./api.js";
import type { ConsoleStore } from "./store.js";

export class FsmTabs {
    rejection: { target: string; reason: string } | null = null;

    constructor(
        private api: ConsoleApi,
        private store: ConsoleStore,
    ) {}

    get active(): string {
        return this.store.fsm.active;
    }

    get states(): string[] {
        return this.store.fsm.states;
    }

    async clickTab(target: string): Promise<boolean> {
        this.rejection = null;
        const before = this.store.fsm.active;
        try {
            await this.api.transition(target);
        } catch (err) {
            if (err instanceof ApiError) {
                this.rejection = { target, reason: err.detail ?? err.reason };
                this.store.setFsmActive(before); // selection unchanged
                return false;
            }
            throw err;
        }
        this.store.setFsmActive(target);
        return true;
    }
}

export class ControllerToggle {
    enabled = true;
    error: string | null = null;

    constructor(private api: ConsoleApi) {}

    async toggle(): Promise<void> {
        const want = !this.enabled;
        this.error = null;
        try {
            await this.api.setController(want);
            this.enabled = want;
        } catch (err) {
            this.error = err instanceof ApiError ? err.reason : String(err);
        }
    }
}
